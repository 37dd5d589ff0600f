#ifndef MIXCRAFT_ESTIMATOR_HPP
#define MIXCRAFT_ESTIMATOR_HPP

#include <algorithm>
#include <atomic>
#include <exception>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mixcraft/criteria.hpp"
#include "mixcraft/data.hpp"
#include "mixcraft/error.hpp"
#include "mixcraft/matrix.hpp"
#include "mixcraft/mixture.hpp"
#include "mixcraft/preprocessing.hpp"

namespace mixcraft {

enum class Restraints { Rigid, Loose };

inline const char* to_string(Restraints r) { return r == Restraints::Rigid ? "rigid" : "loose"; }

inline Restraints parse_restraints(const std::string& name) {
  if (name == "rigid") return Restraints::Rigid;
  if (name == "loose") return Restraints::Loose;
  throw Error(ErrorCode::InvalidArgument, "unknown restraints '" + name + "'");
}

struct EstimatorConfig {
  Preprocessing preprocessing = Preprocessing::Histogram;
  int cmax = 15;
  CriterionKind criterion = CriterionKind::AIC;
  std::optional<KGrid> K;  // empty means "auto"
  RangeOptions range;
  double ar = 0.1;
  Restraints restraints = Restraints::Loose;
  int threads = 1;

  void validate() const {
    if (cmax < 1) throw Error(ErrorCode::InvalidArgument, "cmax must be at least 1");
    if (!(ar > 0.0 && ar <= 1.0)) throw Error(ErrorCode::InvalidArgument, "ar must lie in (0, 1]");
    if (K) {
      if (K->candidates.empty()) throw Error(ErrorCode::InvalidArgument, "K must not be empty");
      for (std::size_t i = 0; i < K->candidates.size(); ++i) {
        if (K->candidates[i] < 1) throw Error(ErrorCode::InvalidArgument, "K values must be positive");
        if (i > 0 && K->candidates[i] <= K->candidates[i - 1]) throw Error(ErrorCode::InvalidArgument, "K must be strictly ascending");
      }
    }
  }
};

/// Preprocessed support for one value of K.
inline EmpiricalSupport preprocess(const Dataset& data, Preprocessing p, int k, const RangeOptions& range = {}) {
  switch (p) {
    case Preprocessing::Histogram: return to_support(build_histogram(data, k, range));
    case Preprocessing::ParzenWindow: return to_support(parzen_density(data, k, range));
    case Preprocessing::KNearestNeighbour: return to_support(knn_density(data, k, range));
  }
  throw Error(ErrorCode::InvalidArgument, "unknown preprocessing");
}

/// Mode-pinned component obtained from conditional densities at the global
/// mode and the correlation structure of its attributed support.
struct RoughComponent {
  Vector mu;
  SymMatrix sigma;        // after ε-inflation
  Vector conditional_sd;  // σ_il from the conditional densities
  double epsilon = 1.0;
  double mode_density = 0.0;  // empirical component density f_lm at the mode
  double weight = 0.0;
  std::vector<double> support;  // attributed frequencies k_lj
};

namespace detail {

inline bool within_cell(const EmpiricalSupport& s, std::size_t centre, std::size_t j, Eigen::Index skip) {
  const auto c = static_cast<Eigen::Index>(centre), r = static_cast<Eigen::Index>(j);
  for (Eigen::Index i = 0; i < s.d(); ++i) {
    if (i == skip) continue;
    if (std::abs(s.positions(r, i) - s.positions(c, i)) > 0.5 * s.cell_widths(c, i)) return false;
  }
  return true;
}

}  // namespace detail

/// Rough estimate at `mode` from the attributed frequencies `support`.
inline RoughComponent rough_estimate(const EmpiricalSupport& s, std::span<const double> support, std::size_t mode, double weight_share) {
  const Eigen::Index d = s.d();
  const auto m = static_cast<Eigen::Index>(mode);
  double nl = 0.0;
  for (double k : support) nl += k;
  if (!(support[mode] > 0.0) || !(nl > 0.0)) throw Error(ErrorCode::SingularConditional, "mode carries no attributed frequency");
  if (!(weight_share > 0.0 && weight_share <= 1.0 + 1e-12)) throw Error(ErrorCode::InvalidArgument, "weight share must lie in (0, 1]");

  RoughComponent rc;
  rc.mu = s.positions.row(m).transpose();
  rc.weight = std::min(weight_share, 1.0);
  rc.mode_density = support[mode] / (nl * s.volume(mode));

  // conditional empirical density along each axis through the mode cell
  double cell_mass = 0.0;
  Vector slab_mass = Vector::Zero(d);
  Matrix scatter = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double k = support[j];
    if (!(k > 0.0)) continue;
    const Vector delta = s.positions.row(static_cast<Eigen::Index>(j)).transpose() - rc.mu;
    scatter.noalias() += k * delta * delta.transpose();
    // j lies in the slab along i when it shares the mode cell in all other axes
    int outside = 0;
    Eigen::Index outside_axis = -1;
    for (Eigen::Index i = 0; i < d && outside < 2; ++i) {
      if (std::abs(delta(i)) > 0.5 * s.cell_widths(m, i)) {
        ++outside;
        outside_axis = i;
      }
    }
    if (outside == 0) {
      cell_mass += k;
      slab_mass.array() += k;
    } else if (outside == 1) {
      slab_mass(outside_axis) += k;
    }
  }
  rc.conditional_sd.resize(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double f_cond = cell_mass / (s.cell_widths(m, i) * slab_mass(i));
    if (!(f_cond > 0.0) || !std::isfinite(f_cond)) throw Error(ErrorCode::SingularConditional, "zero conditional density");
    rc.conditional_sd(i) = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * f_cond);
  }

  // correlation of the support about the mode, then σ_ii = g_ii σ_il²
  SymMatrix corr = SymMatrix::identity(d);
  Vector g = Vector::Ones(d);
  if (d > 1) {
    const SymMatrix cov(Matrix(scatter / nl));
    const Vector cdiag = cov.diag();
    if ((cdiag.array() > 1e-300).all()) {
      try {
        const SymMatrix r = correlation_from_covariance(cov);
        g = inverse(r).diag();
        corr = r;
      } catch (const Error&) {
        corr = SymMatrix::identity(d);
        g = Vector::Ones(d);
      }
    }
  }
  const Vector sigma_sq = g.array() * rc.conditional_sd.array().square();
  SymMatrix sigma = covariance_from_correlation(corr, sigma_sq);

  // ε keeps the component density at the mode from exceeding f_lm
  const double log_peak = -0.5 * (static_cast<double>(d) * kLog2Pi + log_determinant(sigma));
  const double log_ratio = std::log(rc.mode_density) - log_peak;  // log(f_lm sqrt((2π)^d |Σ|))
  rc.epsilon = std::max(1.0, std::exp(-2.0 / static_cast<double>(d) * log_ratio));
  rc.sigma = sigma.scaled(rc.epsilon);
  rc.support.assign(support.begin(), support.end());
  return rc;
}

/// Maximum-likelihood mean and covariance over the attributed support.
/// Loose restraints fall back to the rough covariance when the ML one is
/// not positive definite; rigid restraints always keep it.
inline Component enhanced_estimate(const RoughComponent& rough, const EmpiricalSupport& s, Restraints restraints = Restraints::Loose) {
  const Eigen::Index d = s.d();
  double nl = 0.0;
  Vector mean = Vector::Zero(d);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double k = rough.support[j];
    if (!(k > 0.0)) continue;
    nl += k;
    mean.noalias() += k * s.positions.row(static_cast<Eigen::Index>(j)).transpose();
  }
  if (!(nl >= static_cast<double>(d) + 1.0 - 1e-9)) {
    throw Error(ErrorCode::InsufficientSupport, "attributed frequency below d + 1");
  }
  mean /= nl;
  if (restraints == Restraints::Rigid) return Component(mean, rough.sigma);
  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double k = rough.support[j];
    if (!(k > 0.0)) continue;
    const Vector delta = s.positions.row(static_cast<Eigen::Index>(j)).transpose() - mean;
    cov.noalias() += k * delta * delta.transpose();
  }
  try {
    return Component(mean, SymMatrix(Matrix(cov / nl)));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::NotPositiveDefinite) throw;
    return Component(rough.mu, rough.sigma);
  }
}

inline constexpr double kMinorCut = 0.05;

/// Loop 1 for one component: starting from the full residue, the entries
/// whose attributed frequency exceeds the component's predicted frequency
/// the most, relative to the attributed frequency, are cut back to the
/// prediction and the excess returned to the residue. The band of entries cut
/// per pass is (1 - ar) of the largest relative deviation. The pass repeats
/// until the total of positive relative deviations stops decreasing, or until
/// ε reaches 1 right after a pass that cut little (at most kMinorCut of the
/// attributed mass): from then on the attributed weight is no larger than the
/// mode density implies and further cuts only shrink the component. The mode
/// entry itself is never cut.
inline RoughComponent isolate_component(const EmpiricalSupport& s, std::span<const double> residual, std::size_t mode, double ar,
                                        int max_iterations = 1000, int patience = 10) {
  const double n = static_cast<double>(s.n);
  std::vector<double> attributed(residual.begin(), residual.end());
  std::optional<RoughComponent> best;
  double best_d = std::numeric_limits<double>::infinity();
  std::vector<double> excess(s.size());
  int stalled = 0;
  double last_cut = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iterations; ++it) {
    double nl = 0.0;
    for (double k : attributed) nl += k;
    RoughComponent rc = rough_estimate(s, attributed, mode, std::min(1.0, nl / n));
    const Component comp(rc.mu, rc.sigma);
    const Vector lp = comp.log_pdf_rows(s.positions);
    double positive = 0.0, largest = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      excess[j] = 0.0;
      if (j == mode || !(attributed[j] > 0.0)) continue;
      const double predicted = nl * s.volume(j) * std::exp(lp(static_cast<Eigen::Index>(j)));
      excess[j] = attributed[j] - predicted;
      if (excess[j] > 0.0) {
        positive += excess[j];
        largest = std::max(largest, excess[j] / attributed[j]);
      }
    }
    const double dl = positive / nl;
    if (it > 0 && rc.epsilon <= 1.0 + 1e-12 && last_cut <= kMinorCut * nl) {
      if (dl < best_d || !best) best = std::move(rc);
      break;
    }
    if (dl < best_d) {
      best_d = dl;
      best = std::move(rc);
      stalled = 0;
    } else if (++stalled >= patience) {
      break;
    }
    if (dl <= 1e-9 || largest <= 0.0) break;
    const double threshold = (1.0 - ar) * largest;
    last_cut = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j != mode && excess[j] > 0.0 && excess[j] >= threshold * attributed[j]) {
        attributed[j] -= excess[j];
        last_cut += excess[j];
      }
    }
  }
  return std::move(*best);
}

struct PeeledComponent {
  Component component;
  RoughComponent rough;
  double weight = 0.0;
};

struct PeelResult {
  std::vector<PeeledComponent> components;
  std::vector<std::vector<double>> residual_after;  // residual frequencies after each component
  std::vector<double> residual_weight_after;
  double residual_weight = 1.0;
};

/// Component count bound for a support: cmax and the number of bins or
/// neighbours.
inline int component_bound(const EmpiricalSupport& s, int cmax) {
  return std::max(1, std::min(cmax, std::max(1, s.parameter)));
}

/// Loop 1 repeated over the residue. New components stop once the residual
/// weight is at most d_min·(l - 1) for the next index l, or a bound is hit.
inline PeelResult peel_components(const EmpiricalSupport& s, double d_min, const EstimatorConfig& config) {
  if (s.size() == 0) throw Error(ErrorCode::EmptySelection, "empty support");
  if (!(d_min >= 0.0 && d_min <= 1.0)) throw Error(ErrorCode::InvalidArgument, "d_min must lie in [0, 1]");
  const double n = static_cast<double>(s.n);
  const int bound = component_bound(s, config.cmax);
  std::vector<double> residual = s.frequency;
  double residual_mass = n;
  PeelResult out;
  for (int l = 1; l <= bound; ++l) {
    const double w_res = residual_mass / n;
    if (l > 1 && w_res <= d_min * static_cast<double>(l - 1)) break;
    if (residual_mass <= 1e-9 * n) break;
    GlobalMode mode;
    try {
      mode = global_mode(s, residual);
    } catch (const Error&) {
      break;
    }
    RoughComponent rough = isolate_component(s, residual, mode.index, config.ar);
    double nl = 0.0;
    for (double k : rough.support) nl += k;
    Component comp = [&] {
      try {
        return enhanced_estimate(rough, s, config.restraints);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientSupport) throw;
        return Component(rough.mu, rough.sigma);
      }
    }();
    for (std::size_t j = 0; j < s.size(); ++j) residual[j] = std::max(0.0, residual[j] - rough.support[j]);
    residual_mass = 0.0;
    for (double r : residual) residual_mass += r;
    const double weight = nl / n;
    out.components.push_back(PeeledComponent{std::move(comp), std::move(rough), weight});
    out.residual_after.push_back(residual);
    out.residual_weight_after.push_back(residual_mass / n);
  }
  out.residual_weight = residual_mass / n;
  return out;
}

/// Assigns residual entries one at a time to argmax_l w_l f(y_j|θ_l),
/// updating that component's weight and raw moments, and finally converts
/// the moments back to components.
/// `log_density` optionally caches log f(y_j|θ_l) as an entries × c matrix.
inline MixtureModel bayes_assign(const std::vector<std::pair<double, Component>>& components, const EmpiricalSupport& s,
                                 std::span<const double> residual, const Matrix* log_density = nullptr) {
  if (components.empty()) throw Error(ErrorCode::InvalidArgument, "at least one component required");
  const double n = static_cast<double>(s.n);
  const std::size_t c = components.size();
  double total = 0.0;
  std::vector<MomentPair> moments;
  for (const auto& [w, comp] : components) {
    moments.push_back(moments_from_component(comp, w));
    total += w;
  }
  for (double r : residual) total += r / n;
  if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "component and residual weights must sum to 1");

  std::vector<std::size_t> pending;
  for (std::size_t j = 0; j < residual.size(); ++j)
    if (residual[j] > 0.0) pending.push_back(j);
  Matrix local;
  if (!log_density && !pending.empty()) {
    Matrix pts(static_cast<Eigen::Index>(pending.size()), s.d());
    for (std::size_t r = 0; r < pending.size(); ++r) pts.row(static_cast<Eigen::Index>(r)) = s.positions.row(static_cast<Eigen::Index>(pending[r]));
    local.resize(pts.rows(), static_cast<Eigen::Index>(c));
    for (std::size_t l = 0; l < c; ++l) local.col(static_cast<Eigen::Index>(l)) = components[l].second.log_pdf_rows(pts);
  }
  for (std::size_t r = 0; r < pending.size(); ++r) {
    const std::size_t j = pending[r];
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < c; ++l) {
      const double ld = log_density ? (*log_density)(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(l))
                                    : local(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(l));
      const double score = std::log(moments[l].w) + ld;
      if (score > best_score) {
        best_score = score;
        best = l;
      }
    }
    MomentPair& mp = moments[best];
    const double k = residual[j];
    const Vector y = s.positions.row(static_cast<Eigen::Index>(j)).transpose();
    mp.w += k / n;
    const double step = k / (n * mp.w);
    mp.m += step * (y - mp.m);
    mp.V += step * (y * y.transpose() - mp.V);
  }
  std::vector<double> w;
  std::vector<Component> comps;
  for (std::size_t l = 0; l < c; ++l) {
    try {
      comps.push_back(component_from_moments(moments[l]));
    } catch (const Error& e) {
      throw Error(e.code(), "component " + std::to_string(l + 1) + ": " + e.what());
    }
    w.push_back(moments[l].w);
  }
  double sum = 0.0;
  for (double x : w) sum += x;
  for (double& x : w) x /= sum;
  return MixtureModel(std::move(w), std::move(comps));
}

/// Per-candidate diagnostics at one K; index i describes the mixture whose
/// peel stopped after i + 1 components.
struct FixedKResult {
  int K = 0;
  std::optional<MixtureModel> model;
  FitStatistics stats;
  double ic = std::numeric_limits<double>::infinity();
  std::vector<int> opt_c;
  std::vector<double> opt_IC;
  std::vector<double> opt_logL;
  std::vector<double> opt_D;
  std::vector<double> d_min;  // D_min value realising each candidate
};

/// Loops 2 and 3 for one preprocessed support. Loop 1 does not depend on
/// D_min, so the components are peeled once and each candidate count c uses
/// the first c of them; D_min = w_res(c)/c is the largest value whose
/// stopping rule halts at exactly c. Criteria use the raw observations when
/// given.
inline FixedKResult fit_fixed_K(const EmpiricalSupport& s, const EstimatorConfig& config, const Matrix* observations = nullptr) {
  FixedKResult out;
  out.K = s.parameter;
  const PeelResult peel = peel_components(s, 0.0, config);
  const std::size_t count = peel.components.size();
  Matrix log_density(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(count));
  for (std::size_t l = 0; l < count; ++l)
    log_density.col(static_cast<Eigen::Index>(l)) = peel.components[l].component.log_pdf_rows(s.positions);

  std::vector<std::pair<double, Component>> prefix;
  for (std::size_t c = 1; c <= count; ++c) {
    prefix.emplace_back(peel.components[c - 1].weight, peel.components[c - 1].component);
    out.opt_c.push_back(static_cast<int>(c));
    out.d_min.push_back(std::min(1.0, peel.residual_weight_after[c - 1] / static_cast<double>(c)));
    try {
      MixtureModel model = bayes_assign(prefix, s, peel.residual_after[c - 1], &log_density);
      const FitStatistics st = compute_statistics(model, s, observations);
      const double ic = evaluate_criterion(config.criterion, st);
      out.opt_IC.push_back(ic);
      out.opt_logL.push_back(st.logL);
      out.opt_D.push_back(st.D);
      if (ic < out.ic) {
        out.ic = ic;
        out.stats = st;
        out.model = std::move(model);
      }
    } catch (const Error&) {
      out.opt_IC.push_back(std::numeric_limits<double>::infinity());
      out.opt_logL.push_back(std::numeric_limits<double>::quiet_NaN());
      out.opt_D.push_back(std::numeric_limits<double>::quiet_NaN());
    }
  }
  return out;
}

struct FitSummary {
  std::string dataset;
  Preprocessing preprocessing = Preprocessing::Histogram;
  int cmax = 0;
  CriterionKind criterion = CriterionKind::AIC;
  double ar = 0.0;
  Restraints restraints = Restraints::Loose;
  int c = 0;
  int K = 0;  // optimal v or k
  std::vector<int> K_grid;
  std::optional<Vector> y0, ymin, ymax;
  Vector h;
  double IC = 0.0;
  double logL = 0.0;
  long M = 0;
  bool range_clipped = false;
};

struct FitResult {
  MixtureModel model;
  FitSummary summary;
  FitStatistics stats;
  std::vector<int> opt_c;
  std::vector<double> opt_IC, opt_logL, opt_D;
  std::vector<int> all_K;
  std::vector<double> all_IC;
};

namespace detail {

/// Evaluates fit_fixed_K for a set of K values, in parallel when asked.
class KEvaluator {
 public:
  KEvaluator(const Dataset& data, const EstimatorConfig& config, int kmax) : data_(data), config_(config) {
    if (config.preprocessing == Preprocessing::KNearestNeighbour) {
      table_ = std::make_unique<NeighbourTable>(data, kmax, config.range);
    }
  }

  EmpiricalSupport support(int k) const {
    if (table_) return to_support(table_->density(k));
    return preprocess(data_, config_.preprocessing, k, config_.range);
  }

  const FixedKResult& get(int k) {
    auto it = cache_.find(k);
    if (it == cache_.end()) it = cache_.emplace(k, run(k)).first;
    return it->second;
  }

  void prefetch(const std::vector<int>& ks, int threads) {
    std::vector<int> todo;
    for (int k : ks)
      if (!cache_.count(k)) todo.push_back(k);
    if (threads <= 1 || todo.size() <= 1) {
      for (int k : todo) get(k);
      return;
    }
    std::vector<std::optional<FixedKResult>> results(todo.size());
    std::vector<std::exception_ptr> errors(todo.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (std::size_t i = next++; i < todo.size(); i = next++) {
        try {
          results[i] = run(todo[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      for (int t = 0; t < std::min<int>(threads, static_cast<int>(todo.size())); ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < todo.size(); ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      cache_.emplace(todo[i], std::move(*results[i]));
    }
  }

  const std::map<int, FixedKResult>& cache() const { return cache_; }

 private:
  FixedKResult run(int k) const {
    try {
      const EmpiricalSupport s = support(k);
      const bool binned = config_.preprocessing == Preprocessing::Histogram;
      return fit_fixed_K(s, config_, binned ? &data_.values : nullptr);
    } catch (const Error&) {
      FixedKResult failed;
      failed.K = k;
      return failed;
    }
  }

  const Dataset& data_;
  const EstimatorConfig& config_;
  std::unique_ptr<NeighbourTable> table_;
  std::map<int, FixedKResult> cache_;
};

}  // namespace detail

/// Loop 4: evaluates every K in the grid, refines an interior minimum by
/// golden-section search between its neighbours, and keeps the overall
/// lowest criterion value (ties to the smaller K).
inline FitResult fit(const Dataset& data, const EstimatorConfig& config) {
  config.validate();
  const KGrid grid = config.K ? *config.K : auto_grid(config.preprocessing, static_cast<long>(data.n()));
  if (config.preprocessing == Preprocessing::KNearestNeighbour) {
    if (grid.candidates.front() < 2 || grid.candidates.back() > data.n()) {
      throw Error(ErrorCode::InvalidArgument, "neighbour counts must lie in [2, n]");
    }
  }
  detail::KEvaluator eval(data, config, grid.candidates.back());
  eval.prefetch(grid.candidates, config.threads);

  std::size_t best_index = 0;
  for (std::size_t i = 1; i < grid.candidates.size(); ++i)
    if (eval.get(grid.candidates[i]).ic < eval.get(grid.candidates[best_index]).ic) best_index = i;
  if (best_index > 0 && best_index + 1 < grid.candidates.size() && std::isfinite(eval.get(grid.candidates[best_index]).ic)) {
    golden_section_refine(grid.candidates[best_index - 1], grid.candidates[best_index], grid.candidates[best_index + 1],
                          [&](int k) { return eval.get(k).ic; });
  }

  const FixedKResult* best = nullptr;
  FitResult result{MixtureModel({1.0}, {Component(Vector::Zero(data.d()), SymMatrix::identity(data.d()))}), {}, {}, {}, {}, {}, {}, {}, {}};
  for (const auto& [k, r] : eval.cache()) {
    result.all_K.push_back(k);
    result.all_IC.push_back(r.ic);
    if (r.model && (!best || r.ic < best->ic)) best = &r;
  }
  if (!best) throw Error(ErrorCode::EmptySelection, "no candidate K produced a valid mixture");

  result.model = *best->model;
  result.stats = best->stats;
  result.opt_c = best->opt_c;
  result.opt_IC = best->opt_IC;
  result.opt_logL = best->opt_logL;
  result.opt_D = best->opt_D;

  const EmpiricalSupport s = eval.support(best->K);
  FitSummary& sum = result.summary;
  sum.dataset = data.name;
  sum.preprocessing = config.preprocessing;
  sum.cmax = config.cmax;
  sum.criterion = config.criterion;
  sum.ar = config.ar;
  sum.restraints = config.restraints;
  sum.c = static_cast<int>(result.model.c());
  sum.K = best->K;
  sum.K_grid = grid.candidates;
  sum.y0 = config.range.y0;
  sum.ymin = config.range.ymin;
  sum.ymax = config.range.ymax;
  sum.h = s.h;
  sum.IC = best->ic;
  sum.logL = best->stats.logL;
  sum.M = best->stats.M;
  sum.range_clipped = s.clipped;
  return result;
}

}  // namespace mixcraft

#endif  // MIXCRAFT_ESTIMATOR_HPP
