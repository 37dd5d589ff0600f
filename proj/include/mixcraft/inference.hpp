#ifndef MIXCRAFT_INFERENCE_HPP
#define MIXCRAFT_INFERENCE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mixcraft/data.hpp"
#include "mixcraft/error.hpp"
#include "mixcraft/estimator.hpp"
#include "mixcraft/mixture.hpp"
#include "mixcraft/rng.hpp"

namespace mixcraft {

enum class BootstrapMode { Parametric, Nonparametric };

inline const char* to_string(BootstrapMode m) { return m == BootstrapMode::Parametric ? "parametric" : "nonparametric"; }

inline BootstrapMode parse_bootstrap_mode(const std::string& name) {
  if (name == "parametric") return BootstrapMode::Parametric;
  if (name == "nonparametric") return BootstrapMode::Nonparametric;
  throw Error(ErrorCode::InvalidArgument, "unknown bootstrap mode '" + name + "'");
}

/// Mean, standard error (n - 1 denominator) and coefficient of variation.
struct SpreadStat {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double se = std::numeric_limits<double>::quiet_NaN();
  double cv = std::numeric_limits<double>::quiet_NaN();
};

inline SpreadStat spread(const std::vector<double>& xs) {
  SpreadStat s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return s;
  double ss = 0.0;
  for (double x : xs) ss += (x - s.mean) * (x - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  s.cv = s.se / s.mean;
  return s;
}

struct BootstrapResult {
  BootstrapMode mode = BootstrapMode::Parametric;
  int B = 0;                  // requested replicates
  std::vector<int> c_all;     // one entry per successful replicate
  std::vector<long> replicate_n;  // rows drawn for every replicate
  int failures = 0;
  int c_mode = 0;
  double c_prob = 0.0;
  double c_se = 0.0;
  double c_cv = 0.0;
  int modal_replicates = 0;
  // per matched component, over modal replicates only
  std::vector<SpreadStat> w;
  std::vector<std::vector<SpreadStat>> theta1;  // c × d means
  std::vector<std::vector<SpreadStat>> theta2;  // c × d² covariance entries, row-major
};

namespace detail {

/// Greedy nearest-mean matching: returns, for every reference component, the
/// index of the replicate component assigned to it.
inline std::vector<std::size_t> match_components(const MixtureModel& reference, const MixtureModel& replicate) {
  struct Pair {
    double dist;
    std::size_t ref, rep;
  };
  std::vector<Pair> pairs;
  for (std::size_t a = 0; a < reference.c(); ++a)
    for (std::size_t b = 0; b < replicate.c(); ++b)
      pairs.push_back({(reference.component(a).mu() - replicate.component(b).mu()).squaredNorm(), a, b});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.dist < y.dist; });
  std::vector<std::size_t> out(reference.c(), std::numeric_limits<std::size_t>::max());
  std::vector<bool> used(replicate.c(), false);
  for (const Pair& p : pairs) {
    if (out[p.ref] != std::numeric_limits<std::size_t>::max() || used[p.rep]) continue;
    out[p.ref] = p.rep;
    used[p.rep] = true;
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
  if (threads <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (int t = 0; t < std::min<int>(threads, static_cast<int>(count)); ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

}  // namespace detail

/// Replicates are refitted with `config`; a failed replicate reduces the
/// effective B. Standard errors use only replicates whose c equals c_mode.
inline BootstrapResult bootstrap(const MixtureModel& model, const Dataset& data, BootstrapMode mode, int B, SeededGenerator& rng,
                                 const EstimatorConfig& config) {
  if (B < 2) throw Error(ErrorCode::InvalidArgument, "B must be at least 2");
  if (model.d() != data.d()) throw Error(ErrorCode::DimensionMismatch, "model and data dimensions differ");
  std::vector<long> counts(model.c());
  for (std::size_t l = 0; l < model.c(); ++l) counts[l] = round_half_up(model.w()[l] * static_cast<double>(data.n()));

  std::vector<SeededGenerator> streams;
  for (int b = 0; b < B; ++b) streams.push_back(rng.child(static_cast<std::uint64_t>(b)));

  EstimatorConfig inner = config;
  inner.threads = 1;
  std::vector<std::optional<MixtureModel>> models(static_cast<std::size_t>(B));
  std::vector<long> sizes(static_cast<std::size_t>(B), 0);
  detail::parallel_for(static_cast<std::size_t>(B), config.threads, [&](std::size_t b) {
    SeededGenerator& g = streams[b];
    try {
      Dataset replicate;
      if (mode == BootstrapMode::Parametric) {
        replicate = sample(model, counts, g, data.name + "_boot" + std::to_string(b + 1)).data;
      } else {
        Matrix rows(data.n(), data.d());
        for (Eigen::Index j = 0; j < data.n(); ++j) rows.row(j) = data.values.row(static_cast<Eigen::Index>(g.below(static_cast<std::uint64_t>(data.n()))));
        replicate = Dataset(data.name + "_boot" + std::to_string(b + 1), std::move(rows));
      }
      sizes[b] = static_cast<long>(replicate.n());
      models[b] = fit(replicate, inner).model;
    } catch (const Error&) {
      models[b].reset();
    }
  });

  BootstrapResult out;
  out.mode = mode;
  out.B = B;
  out.replicate_n = std::move(sizes);
  std::map<int, int> tally;
  for (const auto& m : models) {
    if (!m) {
      ++out.failures;
      continue;
    }
    out.c_all.push_back(static_cast<int>(m->c()));
    ++tally[static_cast<int>(m->c())];
  }
  if (out.c_all.empty()) throw Error(ErrorCode::EmptySelection, "every bootstrap replicate failed");
  int best_count = 0;
  for (const auto& [c, k] : tally) {
    if (k > best_count) {
      best_count = k;
      out.c_mode = c;
    }
  }
  out.modal_replicates = best_count;
  out.c_prob = static_cast<double>(best_count) / static_cast<double>(out.c_all.size());
  std::vector<double> cs(out.c_all.begin(), out.c_all.end());
  const SpreadStat cstat = spread(cs);
  out.c_se = cstat.se;
  out.c_cv = cstat.cv;

  const MixtureModel* reference = static_cast<int>(model.c()) == out.c_mode ? &model : nullptr;
  for (const auto& m : models)
    if (!reference && m && static_cast<int>(m->c()) == out.c_mode) reference = &*m;

  const std::size_t c = static_cast<std::size_t>(out.c_mode);
  const auto d = static_cast<std::size_t>(model.d());
  std::vector<std::vector<double>> w(c);
  std::vector<std::vector<std::vector<double>>> t1(c, std::vector<std::vector<double>>(d)), t2(c, std::vector<std::vector<double>>(d * d));
  for (const auto& m : models) {
    if (!m || m->c() != c) continue;
    const auto match = detail::match_components(*reference, *m);
    for (std::size_t l = 0; l < c; ++l) {
      const std::size_t r = match[l];
      w[l].push_back(m->w()[r]);
      const Component& comp = m->component(r);
      for (std::size_t i = 0; i < d; ++i) t1[l][i].push_back(comp.mu()(static_cast<Eigen::Index>(i)));
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t k = 0; k < d; ++k) t2[l][i * d + k].push_back(comp.sigma()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
    }
  }
  out.theta1.resize(c);
  out.theta2.resize(c);
  for (std::size_t l = 0; l < c; ++l) {
    out.w.push_back(spread(w[l]));
    for (const auto& xs : t1[l]) out.theta1[l].push_back(spread(xs));
    for (const auto& xs : t2[l]) out.theta2[l].push_back(spread(xs));
  }
  return out;
}

inline BootstrapResult bootstrap(const FitResult& fitted, const Dataset& data, BootstrapMode mode, int B, SeededGenerator& rng,
                                 const EstimatorConfig& config) {
  return bootstrap(fitted.model, data, mode, B, rng, config);
}

/// Hierarchical merge of mixture components by maximal entropy decrease.
/// Level k (1..c) holds k clusters; clusters are named by the smallest
/// original component id they contain.
struct ClusteringResult {
  int c = 0;
  std::vector<std::vector<int>> Zp;  // Zp[k - 1]: cluster id per observation at level k
  std::vector<double> EN;            // EN[k - 1]
  std::vector<int> from, to;         // from[k - 1] merged into to[k - 1] to reach level k, for k < c
  std::vector<double> ED;            // ED[k - 1] = EN[k] - EN[k - 1]
  std::optional<std::vector<double>> prob;

  std::size_t copt() const {
    if (!prob) return static_cast<std::size_t>(c);
    return static_cast<std::size_t>(std::max_element(prob->begin(), prob->end()) - prob->begin()) + 1;
  }
};

/// Fraction of observations correct when each predicted cluster maps to the
/// true class holding the plurality of its members.
inline double correct_clustering_prob(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size()) throw Error(ErrorCode::LengthMismatch, "predicted and true labels differ in length");
  if (predicted.empty()) return 0.0;
  std::map<int, std::map<int, long>> table;
  for (std::size_t j = 0; j < predicted.size(); ++j) ++table[predicted[j]][truth[j]];
  long correct = 0;
  for (const auto& [p, row] : table) {
    long best = 0;
    for (const auto& [t, k] : row) best = std::max(best, k);
    correct += best;
  }
  return static_cast<double>(correct) / static_cast<double>(predicted.size());
}

namespace detail {

inline double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

inline double column_entropy_term(const Matrix& tau, Eigen::Index a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < tau.rows(); ++j) s += xlogx(tau(j, a));
  return s;
}

inline double pair_entropy_term(const Matrix& tau, Eigen::Index a, Eigen::Index b) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < tau.rows(); ++j) s += xlogx(tau(j, a) + tau(j, b));
  return s;
}

}  // namespace detail

inline ClusteringResult merge_clusters(const MixtureModel& model, const Dataset& data, const std::vector<int>* truth = nullptr) {
  if (truth && static_cast<Eigen::Index>(truth->size()) != data.n()) throw Error(ErrorCode::LengthMismatch, "truth length differs from data");
  Matrix tau = posterior_rows(model, data.values);
  const auto c = static_cast<Eigen::Index>(model.c());
  ClusteringResult out;
  out.c = static_cast<int>(c);
  out.Zp.resize(static_cast<std::size_t>(c));
  out.EN.resize(static_cast<std::size_t>(c));
  out.from.assign(static_cast<std::size_t>(c - 1), 0);
  out.to.assign(static_cast<std::size_t>(c - 1), 0);
  out.ED.assign(static_cast<std::size_t>(c - 1), 0.0);

  std::vector<Eigen::Index> active(static_cast<std::size_t>(c));
  std::iota(active.begin(), active.end(), Eigen::Index{0});
  Vector single(c);
  for (Eigen::Index a = 0; a < c; ++a) single(a) = detail::column_entropy_term(tau, a);
  Matrix joint = Matrix::Zero(c, c);
  for (Eigen::Index a = 0; a < c; ++a)
    for (Eigen::Index b = a + 1; b < c; ++b) joint(a, b) = detail::pair_entropy_term(tau, a, b);

  auto record_level = [&](std::size_t k) {
    double en = 0.0;
    std::vector<int> zp(static_cast<std::size_t>(data.n()));
    for (Eigen::Index j = 0; j < tau.rows(); ++j) {
      Eigen::Index best = active.front();
      for (Eigen::Index a : active) {
        en -= detail::xlogx(tau(j, a));
        if (tau(j, a) > tau(j, best)) best = a;
      }
      zp[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
    }
    out.EN[k - 1] = std::max(en, 0.0);
    out.Zp[k - 1] = std::move(zp);
  };

  record_level(static_cast<std::size_t>(c));
  for (std::size_t k = static_cast<std::size_t>(c); k > 1; --k) {
    Eigen::Index ba = -1, bb = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (std::size_t x = 0; x < active.size(); ++x)
      for (std::size_t y = x + 1; y < active.size(); ++y) {
        const Eigen::Index a = active[x], b = active[y];
        const double gain = joint(a, b) - single(a) - single(b);
        if (gain > best_gain) {
          best_gain = gain;
          ba = a;
          bb = b;
        }
      }
    tau.col(ba) += tau.col(bb);
    active.erase(std::find(active.begin(), active.end(), bb));
    single(ba) = joint(ba, bb);
    for (Eigen::Index other : active)
      if (other != ba) {
        const Eigen::Index lo = std::min(ba, other), hi = std::max(ba, other);
        joint(lo, hi) = detail::pair_entropy_term(tau, lo, hi);
      }
    record_level(k - 1);
    out.from[k - 2] = static_cast<int>(bb) + 1;
    out.to[k - 2] = static_cast<int>(ba) + 1;
    out.ED[k - 2] = std::max(0.0, out.EN[k - 1] - out.EN[k - 2]);
  }
  if (truth) {
    std::vector<double> prob;
    for (const auto& zp : out.Zp) prob.push_back(correct_clustering_prob(zp, *truth));
    out.prob = std::move(prob);
  }
  return out;
}

/// One-vs-rest metrics from a confusion matrix cm(true, predicted). Precision
/// of a never-predicted class and sensitivity of an empty class are
/// undefined (std::nullopt).
struct ConfusionMetrics {
  double accuracy = 0.0;
  double error = 0.0;
  std::vector<std::optional<double>> precision;
  std::vector<std::optional<double>> sensitivity;
  std::vector<std::optional<double>> specificity;
};

using CountMatrix = Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>;

inline ConfusionMetrics confusion_metrics(const CountMatrix& cm) {
  if (cm.rows() != cm.cols()) throw Error(ErrorCode::DimensionMismatch, "confusion matrix must be square");
  if ((cm.array() < 0).any()) throw Error(ErrorCode::InvalidArgument, "confusion counts must be non-negative");
  ConfusionMetrics m;
  const long total = cm.sum();
  const long correct = cm.trace();
  m.accuracy = total > 0 ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
  m.error = total > 0 ? static_cast<double>(total - correct) / static_cast<double>(total) : 0.0;
  for (Eigen::Index s = 0; s < cm.rows(); ++s) {
    const long tp = cm(s, s);
    const long predicted = cm.col(s).sum();
    const long actual = cm.row(s).sum();
    const long tn = total - predicted - actual + tp;
    const long negatives = total - actual;
    m.precision.push_back(predicted > 0 ? std::optional<double>(static_cast<double>(tp) / static_cast<double>(predicted)) : std::nullopt);
    m.sensitivity.push_back(actual > 0 ? std::optional<double>(static_cast<double>(tp) / static_cast<double>(actual)) : std::nullopt);
    m.specificity.push_back(negatives > 0 ? std::optional<double>(static_cast<double>(tn) / static_cast<double>(negatives)) : std::nullopt);
  }
  return m;
}

struct ClassificationResult {
  int s = 0;
  std::vector<double> P;    // normalized class priors
  std::vector<int> Zp;      // predicted class (1-based) per test row
  std::optional<CountMatrix> CM;
  std::optional<ConfusionMetrics> metrics;
};

/// Bayes classifier: Zp_j = argmax_s P_s f_s(y_j), ties to the lower class.
inline ClassificationResult classify(const std::vector<MixtureModel>& models, const std::vector<double>& priors, const Dataset& test,
                                     const std::vector<int>* truth = nullptr) {
  if (models.empty() || models.size() != priors.size()) throw Error(ErrorCode::DimensionMismatch, "one prior per class model required");
  for (const auto& m : models)
    if (m.d() != test.d()) throw Error(ErrorCode::DimensionMismatch, "class model dimension differs from test data");
  if (truth && static_cast<Eigen::Index>(truth->size()) != test.n()) throw Error(ErrorCode::LengthMismatch, "truth length differs from test rows");
  double total = 0.0;
  for (double p : priors) {
    if (!(p > 0.0)) throw Error(ErrorCode::InvalidArgument, "priors must be positive");
    total += p;
  }
  ClassificationResult out;
  out.s = static_cast<int>(models.size());
  for (double p : priors) out.P.push_back(p / total);

  Matrix score(test.n(), out.s);
  for (int s = 0; s < out.s; ++s) score.col(s) = models[static_cast<std::size_t>(s)].log_pdf_rows(test.values).array() + std::log(out.P[static_cast<std::size_t>(s)]);
  out.Zp.resize(static_cast<std::size_t>(test.n()));
  for (Eigen::Index j = 0; j < test.n(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index s = 1; s < score.cols(); ++s)
      if (score(j, s) > score(j, best)) best = s;
    out.Zp[static_cast<std::size_t>(j)] = static_cast<int>(best) + 1;
  }
  if (truth) {
    const int s = std::max(out.s, *std::max_element(truth->begin(), truth->end()));
    CountMatrix cm = CountMatrix::Zero(s, s);
    for (std::size_t j = 0; j < truth->size(); ++j) ++cm((*truth)[j] - 1, out.Zp[j] - 1);
    out.metrics = confusion_metrics(cm);
    out.CM = std::move(cm);
  }
  return out;
}

/// Fits one mixture per class of the training chunk; priors are the class
/// shares of the training rows.
struct TrainedClassifier {
  std::vector<FitResult> fits;
  std::vector<double> priors;

  std::vector<MixtureModel> models() const {
    std::vector<MixtureModel> out;
    for (const auto& f : fits) out.push_back(f.model);
    return out;
  }
};

inline TrainedClassifier train_classifier(const LabeledDataset& train, const EstimatorConfig& config) {
  TrainedClassifier out;
  const auto classes = train.by_class();
  for (const auto& ds : classes) {
    out.fits.push_back(fit(ds, config));
    out.priors.push_back(static_cast<double>(ds.n()) / static_cast<double>(train.data.n()));
  }
  return out;
}

}  // namespace mixcraft

#endif  // MIXCRAFT_INFERENCE_HPP
