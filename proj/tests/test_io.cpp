#include <gtest/gtest.h>

#include "generators.hpp"
#include "mixcraft/io.hpp"
#include "temp_dir.hpp"

using namespace mixcraft;

TEST(ModelDocument, SchemaFields) {
  Matrix s(2, 2);
  s << 2, 0.5, 0.5, 1;
  const MixtureModel m({0.25, 0.75}, {Component(Vector::Zero(2), SymMatrix::identity(2)), Component(Vector::Ones(2), SymMatrix(s))});
  const Json doc = model_to_json(m);
  EXPECT_EQ(doc.at("d"), 2);
  EXPECT_EQ(doc.at("c"), 2);
  EXPECT_EQ(doc.at("w"), Json::parse("[0.25, 0.75]"));
  EXPECT_EQ(doc.at("components").at(1).at("sigma"), Json::parse("[2.0, 0.5, 0.5, 1.0]"));
  EXPECT_EQ(doc.at("components").at(1).at("mu"), Json::parse("[1.0, 1.0]"));
}

TEST(ModelDocument, MalformedDocumentsAreParseErrors) {
  auto expect_parse_error = [](const std::string& text) {
    try {
      model_from_json(Json::parse(text));
      FAIL() << text;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::ParseError) << text;
    }
  };
  expect_parse_error(R"({"d": 1})");
  expect_parse_error(R"({"d": 1, "c": 1, "w": [1.0], "components": [{"mu": [0, 0], "sigma": [1]}]})");
  expect_parse_error(R"({"d": 1, "c": 2, "w": [1.0], "components": [{"mu": [0], "sigma": [1]}]})");
  EXPECT_THROW(model_from_json(Json::parse(R"({"d": 1, "c": 1, "w": [1.0], "components": [{"mu": [0], "sigma": [-1]}]})")), Error);
}

TEST(ModelDocument, FileErrors) {
  mixcraft::testing::TempDir dir;
  EXPECT_THROW(load_model(dir.file("missing.json")), Error);
  try {
    load_model(dir.write("bad.json", "{not json"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
  }
}

TEST(Reports, SummaryColumns) {
  FitSummary s;
  s.dataset = "mvnorm_1";
  s.preprocessing = Preprocessing::Histogram;
  s.criterion = CriterionKind::BIC;
  s.c = 24;
  s.K = 46;
  s.IC = 931191;
  s.logL = -464822;
  s.M = 143;
  EXPECT_EQ(summary_csv(s), "Dataset,Preprocessing,Criterion,c,v/k,IC,logL,M\nmvnorm_1,histogram,BIC,24,46,931191,-464822,143\n");
}

TEST(Reports, UndefinedMarkers) {
  EXPECT_EQ(metric_text(std::nullopt), "NA");
  EXPECT_EQ(metric_text(0.5), "0.5");
  EXPECT_EQ(fixed(std::numeric_limits<double>::quiet_NaN()), "NA");
  EXPECT_EQ(fixed(0.12345, 2), "0.12");
  const Json j = spread_to_json(spread({1.0}));
  EXPECT_EQ(j.at("se"), "NA");
  EXPECT_EQ(j.at("mean"), 1.0);
}

TEST(Reports, TableAlignment) {
  EXPECT_EQ(format_table({"a", "bbb"}, {{"10", "1"}, {"2", "22"}}), " a bbb\n10   1\n 2  22\n");
}

TEST(IoProperties, ModelRoundTripIsExact) {
  mixcraft::testing::TempDir dir;
  auto rng = SeededGenerator::substream(51, "io");
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(4));
    const MixtureModel m = mixcraft::testing::random_model(d, 1 + rng.below(5), rng);
    const std::string path = dir.file("m" + std::to_string(trial) + ".json");
    save_model(path, m);
    const MixtureModel back = load_model(path);
    ASSERT_EQ(back.c(), m.c());
    for (std::size_t l = 0; l < m.c(); ++l) {
      EXPECT_EQ(back.w()[l], m.w()[l]);
      EXPECT_EQ(back.component(l).mu(), m.component(l).mu());
      EXPECT_EQ(back.component(l).sigma(), m.component(l).sigma());
    }
    save_model(dir.file("again.json"), back);
    EXPECT_EQ(read_text(dir.file("again.json")), read_text(path));
  }
}
