#include <gtest/gtest.h>

#include <cmath>

#include "generators.hpp"
#include "mixcraft/inference.hpp"

using namespace mixcraft;

namespace {

Component unit(Eigen::Index d, double at) { return Component(Vector::Constant(d, at), SymMatrix::identity(d)); }

MixtureModel separated_pair() { return MixtureModel({0.5, 0.5}, {unit(2, -15.0), unit(2, 15.0)}); }

EstimatorConfig quick_config() {
  EstimatorConfig config;
  config.criterion = CriterionKind::BIC;
  config.cmax = 4;
  config.K = KGrid{{10, 20}};
  return config;
}

CountMatrix counts(std::initializer_list<std::initializer_list<long>> rows) {
  CountMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (long x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

}  // namespace

TEST(Spread, SampleStandardDeviation) {
  const SpreadStat s = spread({1.0, 2.0, 3.0, 4.0});
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.se, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(s.cv, std::sqrt(5.0 / 3.0) / 2.5, 1e-15);
  EXPECT_TRUE(std::isnan(spread({1.0}).se));
}

TEST(Bootstrap, CleanPairIsStable) {
  auto rng = SeededGenerator::substream(41, "data");
  const Dataset data = sample(separated_pair(), {400, 400}, rng).data;
  auto boot_rng = SeededGenerator::substream(41, "boot");
  const BootstrapResult r = bootstrap(separated_pair(), data, BootstrapMode::Parametric, 10, boot_rng, quick_config());
  EXPECT_EQ(r.c_mode, 2);
  EXPECT_GE(r.c_prob, 0.8);
  ASSERT_EQ(r.w.size(), 2u);
  EXPECT_NEAR(r.w[0].mean, 0.5, 0.02);
  if (r.c_prob == 1.0) {
    EXPECT_EQ(r.c_se, 0.0);
  }
  ASSERT_EQ(r.theta1.size(), 2u);
  EXPECT_EQ(r.theta1[0].size(), 2u);
  EXPECT_EQ(r.theta2[0].size(), 4u);
}

TEST(Bootstrap, DeterministicAndThreadIndependent) {
  auto rng = SeededGenerator::substream(42, "data");
  const Dataset data = sample(separated_pair(), {200, 200}, rng).data;
  EstimatorConfig config = quick_config();
  auto a_rng = SeededGenerator::substream(42, "boot");
  const BootstrapResult a = bootstrap(separated_pair(), data, BootstrapMode::Nonparametric, 4, a_rng, config);
  config.threads = 3;
  auto b_rng = SeededGenerator::substream(42, "boot");
  const BootstrapResult b = bootstrap(separated_pair(), data, BootstrapMode::Nonparametric, 4, b_rng, config);
  EXPECT_EQ(a.c_all, b.c_all);
  EXPECT_EQ(a.w[0].mean, b.w[0].mean);
}

TEST(Bootstrap, RejectsTooFewReplicates) {
  auto rng = SeededGenerator::substream(43, "boot");
  const Dataset data("x", Matrix::Zero(4, 2));
  EXPECT_THROW(bootstrap(separated_pair(), data, BootstrapMode::Parametric, 1, rng, quick_config()), Error);
  EXPECT_EQ(parse_bootstrap_mode("nonparametric"), BootstrapMode::Nonparametric);
  EXPECT_THROW(parse_bootstrap_mode("jackknife"), Error);
}

TEST(Matching, GreedyNearestMean) {
  const MixtureModel ref({0.5, 0.5}, {unit(1, 0.0), unit(1, 10.0)});
  const MixtureModel rep({0.5, 0.5}, {unit(1, 9.0), unit(1, 1.0)});
  EXPECT_EQ(detail::match_components(ref, rep), (std::vector<std::size_t>{1, 0}));
}

TEST(ClusteringProb, Examples) {
  EXPECT_DOUBLE_EQ(correct_clustering_prob({1, 2, 3, 1}, {1, 2, 3, 1}), 1.0);
  EXPECT_DOUBLE_EQ(correct_clustering_prob({1, 1, 1, 1, 1, 1}, {1, 1, 2, 2, 3, 3}), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(correct_clustering_prob({2, 2, 1, 1}, {1, 1, 2, 2}), 1.0);
  EXPECT_THROW(correct_clustering_prob({1}, {1, 2}), Error);
}

TEST(Merge, SingleComponentHasNoMerges) {
  const ClusteringResult r = merge_clusters(MixtureModel({1.0}, {unit(2, 0.0)}), Dataset("x", Matrix::Random(10, 2)));
  EXPECT_EQ(r.c, 1);
  EXPECT_EQ(r.EN[0], 0.0);
  EXPECT_TRUE(r.from.empty());
}

TEST(Merge, IdenticalComponentsMergeFirstAndLoseAllEntropy) {
  const MixtureModel m({0.3, 0.3, 0.4}, {unit(1, 0.0), unit(1, 0.0), unit(1, 50.0)});
  auto rng = SeededGenerator::substream(44, "merge");
  const LabeledDataset data = sample(m, {30, 30, 40}, rng);
  const ClusteringResult r = merge_clusters(m, data.data);
  ASSERT_EQ(r.from.size(), 2u);
  EXPECT_EQ(r.from[1], 2);
  EXPECT_EQ(r.to[1], 1);
  EXPECT_NEAR(r.ED[1], r.EN[2], 1e-9);
  EXPECT_NEAR(r.EN[1], 0.0, 1e-9);
}

TEST(ConfusionMetricsTest, Examples) {
  const ConfusionMetrics id = confusion_metrics(counts({{5, 0}, {0, 7}}));
  EXPECT_EQ(id.accuracy, 1.0);
  EXPECT_EQ(id.error, 0.0);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_EQ(*id.precision[s], 1.0);
    EXPECT_EQ(*id.sensitivity[s], 1.0);
    EXPECT_EQ(*id.specificity[s], 1.0);
  }
  const ConfusionMetrics m = confusion_metrics(counts({{8, 2}, {3, 7}}));
  EXPECT_DOUBLE_EQ(m.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(m.error, 0.25);
  EXPECT_DOUBLE_EQ(*m.precision[0], 8.0 / 11.0);
  EXPECT_DOUBLE_EQ(*m.sensitivity[0], 0.8);
  EXPECT_DOUBLE_EQ(*m.specificity[0], 0.7);
  const ConfusionMetrics gap = confusion_metrics(counts({{4, 0}, {0, 0}}));
  EXPECT_FALSE(gap.sensitivity[1].has_value());
  EXPECT_FALSE(gap.precision[1].has_value());
}

TEST(Classify, Examples) {
  const std::vector<MixtureModel> far{MixtureModel({1.0}, {unit(2, -10.0)}), MixtureModel({1.0}, {unit(2, 10.0)})};
  const Dataset at_mean("t", Matrix::Constant(1, 2, 10.0));
  EXPECT_EQ(classify(far, {0.5, 0.5}, at_mean).Zp, std::vector<int>{2});

  const std::vector<MixtureModel> same{MixtureModel({1.0}, {unit(2, 0.0)}), MixtureModel({1.0}, {unit(2, 0.0)})};
  const ClassificationResult r = classify(same, {0.9, 0.1}, Dataset("t", Matrix::Random(20, 2)));
  for (int z : r.Zp) EXPECT_EQ(z, 1);
  const ClassificationResult tie = classify(same, {0.5, 0.5}, Dataset("t", Matrix::Random(5, 2)));
  for (int z : tie.Zp) EXPECT_EQ(z, 1);

  EXPECT_THROW(classify(same, {0.5}, at_mean), Error);
  const std::vector<int> short_truth{1, 2};
  EXPECT_THROW(classify(same, {0.5, 0.5}, at_mean, &short_truth), Error);
}

TEST(Classify, TrainedOnSplitRecoversClasses) {
  auto rng = SeededGenerator::substream(45, "train");
  const LabeledDataset all = sample(separated_pair(), {300, 300}, rng);
  auto split_rng = SeededGenerator::substream(45, "split");
  const SplitResult parts = split(all, 0.6, split_rng);
  const TrainedClassifier clf = train_classifier(parts.train.front(), quick_config());
  const ClassificationResult r = classify(clf.models(), clf.priors, parts.test, &parts.test_labels);
  ASSERT_TRUE(r.metrics);
  EXPECT_EQ(r.metrics->error, 0.0);
  EXPECT_NEAR(r.P[0], 0.5, 0.05);
}

TEST(InferenceProperties, MergeInvariantsOnRandomModels) {
  auto rng = SeededGenerator::substream(46, "merge");
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t c = 1 + rng.below(6);
    GeneratorSpec spec;
    spec.c = c;
    spec.mu_range = {-20.0, 20.0};
    spec.lambda_range = {1.0, 20.0};
    const GeneratedModel g = generate_random_model(spec, rng);
    std::vector<long> n(c, 60);
    const LabeledDataset data = sample(g.model, n, rng);
    const ClusteringResult r = merge_clusters(g.model, data.data, &data.labels);
    ASSERT_EQ(r.EN.size(), c);
    EXPECT_NEAR(r.EN[0], 0.0, 1e-9);
    for (std::size_t k = 1; k < c; ++k) {
      EXPECT_LE(r.EN[k - 1], r.EN[k] + 1e-9);
      EXPECT_GE(r.ED[k - 1], 0.0);
      EXPECT_GT(r.from[k - 1], r.to[k - 1]);
    }
    for (int z : r.Zp[0]) EXPECT_EQ(z, r.Zp[0][0]);
    ASSERT_TRUE(r.prob);
    for (double p : *r.prob) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(InferenceProperties, ClusteringProbIgnoresRelabeling) {
  auto rng = SeededGenerator::substream(47, "relabel");
  for (int trial = 0; trial < 100; ++trial) {
    const int k = 1 + static_cast<int>(rng.below(6));
    std::vector<int> zp(50), zt(50), perm(static_cast<std::size_t>(k));
    for (auto& z : zp) z = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
    for (auto& z : zt) z = 1 + static_cast<int>(rng.below(4));
    std::iota(perm.begin(), perm.end(), 1);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    std::vector<int> relabeled(zp.size());
    for (std::size_t j = 0; j < zp.size(); ++j) relabeled[j] = perm[static_cast<std::size_t>(zp[j] - 1)];
    EXPECT_EQ(correct_clustering_prob(zp, zt), correct_clustering_prob(relabeled, zt));
  }
}

TEST(InferenceProperties, ClassifyPriorScaleAndConfusionMargins) {
  auto rng = SeededGenerator::substream(48, "classify");
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t s = 2 + rng.below(3);
    std::vector<MixtureModel> models;
    std::vector<double> priors;
    for (std::size_t i = 0; i < s; ++i) {
      models.push_back(mixcraft::testing::random_model(2, 1 + rng.below(3), rng));
      priors.push_back(rng.uniform(0.1, 1.0));
    }
    Matrix test(40, 2);
    std::vector<int> truth(40);
    for (Eigen::Index j = 0; j < 40; ++j) {
      test.row(j) = mixcraft::testing::random_vector(2, rng).transpose();
      truth[static_cast<std::size_t>(j)] = 1 + static_cast<int>(rng.below(s));
    }
    const Dataset data("t", test);
    const ClassificationResult a = classify(models, priors, data, &truth);
    std::vector<double> scaled = priors;
    for (double& p : scaled) p *= 7.5;
    EXPECT_EQ(classify(models, scaled, data).Zp, a.Zp);
    EXPECT_EQ(a.CM->sum(), 40);
    for (std::size_t k = 0; k < s; ++k) {
      EXPECT_EQ(a.CM->row(static_cast<Eigen::Index>(k)).sum(), std::count(truth.begin(), truth.end(), static_cast<int>(k) + 1));
      EXPECT_EQ(a.CM->col(static_cast<Eigen::Index>(k)).sum(), std::count(a.Zp.begin(), a.Zp.end(), static_cast<int>(k) + 1));
    }
    EXPECT_NEAR(a.metrics->error, 1.0 - a.metrics->accuracy, 1e-15);
  }
}

TEST(InferenceProperties, ResamplesPreserveSize) {
  auto rng = SeededGenerator::substream(49, "sizes");
  const Dataset data = sample(separated_pair(), {150, 150}, rng).data;
  auto boot_rng = SeededGenerator::substream(49, "boot");
  const BootstrapResult r = bootstrap(separated_pair(), data, BootstrapMode::Nonparametric, 3, boot_rng, quick_config());
  EXPECT_EQ(static_cast<int>(r.c_all.size()) + r.failures, 3);
  EXPECT_EQ(r.replicate_n, std::vector<long>(3, 300));
}
