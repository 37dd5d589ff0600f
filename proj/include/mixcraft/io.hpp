#ifndef MIXCRAFT_IO_HPP
#define MIXCRAFT_IO_HPP

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixcraft/data.hpp"
#include "mixcraft/error.hpp"
#include "mixcraft/estimator.hpp"
#include "mixcraft/inference.hpp"
#include "mixcraft/mixture.hpp"

namespace mixcraft {

using Json = nlohmann::ordered_json;

inline constexpr const char* kVersion = "1.0.0";

/// Token written in place of an undefined metric.
inline constexpr const char* kUndefined = "NA";

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
  out << text;
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json read_json(const std::string& path) {
  try {
    return Json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
}

inline void write_json(const std::string& path, const Json& doc) { write_text(path, doc.dump(2) + "\n"); }

inline Json to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Model document: {"d", "c", "w": [...], "components": [{"mu": [...], "sigma": [row-major d*d]}]}
inline Json model_to_json(const MixtureModel& model) {
  Json doc;
  doc["d"] = model.d();
  doc["c"] = model.c();
  doc["w"] = model.w();
  Json comps = Json::array();
  for (const Component& comp : model.components()) {
    Json sigma = Json::array();
    for (Eigen::Index i = 0; i < model.d(); ++i)
      for (Eigen::Index k = 0; k < model.d(); ++k) sigma.push_back(comp.sigma()(i, k));
    comps.push_back(Json{{"mu", to_json(comp.mu())}, {"sigma", std::move(sigma)}});
  }
  doc["components"] = std::move(comps);
  return doc;
}

inline MixtureModel model_from_json(const Json& doc) {
  try {
    const auto d = doc.at("d").get<Eigen::Index>();
    const auto c = doc.at("c").get<std::size_t>();
    const auto w = doc.at("w").get<std::vector<double>>();
    const Json& comps = doc.at("components");
    if (d < 1 || c < 1 || w.size() != c || comps.size() != c) throw Error(ErrorCode::ParseError, "model document sizes disagree");
    std::vector<Component> components;
    for (const Json& item : comps) {
      const auto mu = item.at("mu").get<std::vector<double>>();
      const auto sigma = item.at("sigma").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(mu.size()) != d || static_cast<Eigen::Index>(sigma.size()) != d * d) {
        throw Error(ErrorCode::ParseError, "component size differs from d");
      }
      Matrix s(d, d);
      for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index k = 0; k < d; ++k) s(i, k) = sigma[static_cast<std::size_t>(i * d + k)];
      components.emplace_back(Eigen::Map<const Vector>(mu.data(), d), SymMatrix(s));
    }
    return MixtureModel(w, std::move(components));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model document: ") + e.what());
  }
}

inline void save_model(const std::string& path, const MixtureModel& model) { write_json(path, model_to_json(model)); }

inline MixtureModel load_model(const std::string& path) { return model_from_json(read_json(path)); }

inline std::string summary_csv(const FitSummary& s) {
  std::ostringstream out;
  out << "Dataset,Preprocessing,Criterion,c,v/k,IC,logL,M\n";
  out << s.dataset << ',' << to_string(s.preprocessing) << ',' << to_string(s.criterion) << ',' << s.c << ',' << s.K << ','
      << format_double(s.IC) << ',' << format_double(s.logL) << ',' << s.M << '\n';
  return out.str();
}

/// Candidate component counts and their statistics at the optimal v or k.
inline std::string opt_csv(const FitResult& r) {
  std::ostringstream out;
  out << "c,IC,logL,D\n";
  for (std::size_t i = 0; i < r.opt_c.size(); ++i) {
    out << r.opt_c[i] << ',' << format_double(r.opt_IC[i]) << ',' << format_double(r.opt_logL[i]) << ',' << format_double(r.opt_D[i]) << '\n';
  }
  return out.str();
}

inline std::string all_csv(const FitResult& r) {
  std::ostringstream out;
  out << "K,IC\n";
  for (std::size_t i = 0; i < r.all_K.size(); ++i) out << r.all_K[i] << ',' << format_double(r.all_IC[i]) << '\n';
  return out.str();
}

inline Json spread_to_json(const SpreadStat& s) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(kUndefined); };
  return Json{{"mean", num(s.mean)}, {"se", num(s.se)}, {"cv", num(s.cv)}};
}

inline Json bootstrap_to_json(const BootstrapResult& b) {
  Json doc;
  doc["mode"] = to_string(b.mode);
  doc["B"] = b.B;
  doc["failures"] = b.failures;
  doc["c"] = b.c_all;
  doc["c_mode"] = b.c_mode;
  doc["c_prob"] = b.c_prob;
  doc["c_se"] = std::isfinite(b.c_se) ? Json(b.c_se) : Json(kUndefined);
  doc["c_cv"] = std::isfinite(b.c_cv) ? Json(b.c_cv) : Json(kUndefined);
  doc["modal_replicates"] = b.modal_replicates;
  Json comps = Json::array();
  for (std::size_t l = 0; l < b.w.size(); ++l) {
    Json t1 = Json::array(), t2 = Json::array();
    for (const auto& s : b.theta1[l]) t1.push_back(spread_to_json(s));
    for (const auto& s : b.theta2[l]) t2.push_back(spread_to_json(s));
    comps.push_back(Json{{"w", spread_to_json(b.w[l])}, {"theta1", std::move(t1)}, {"theta2", std::move(t2)}});
  }
  doc["components"] = std::move(comps);
  return doc;
}

inline std::string metric_text(const std::optional<double>& x) { return x ? format_double(*x) : std::string(kUndefined); }

/// Fixed-point table text with right-aligned columns.
inline std::string format_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t j = 0; j < header.size(); ++j) width[j] = header[j].size();
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size() && j < width.size(); ++j) width[j] = std::max(width[j], r[j].size());
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t j = 0; j < cells.size(); ++j) out << (j ? " " : "") << std::string(width[j] - cells[j].size(), ' ') << cells[j];
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

inline std::string fixed(double x, int digits = 3) {
  if (!std::isfinite(x)) return kUndefined;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

}  // namespace mixcraft

#endif  // MIXCRAFT_IO_HPP
