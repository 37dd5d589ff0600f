#ifndef MIXCRAFT_MIXTURE_HPP
#define MIXCRAFT_MIXTURE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "mixcraft/data.hpp"
#include "mixcraft/error.hpp"
#include "mixcraft/matrix.hpp"
#include "mixcraft/preprocessing.hpp"
#include "mixcraft/rng.hpp"

namespace mixcraft {

inline constexpr double kLog2Pi = 1.8378770664093454835606594728112;

/// Multivariate normal component. The Cholesky factor is computed once on
/// construction; an indefinite covariance is rejected there.
class Component {
 public:
  Component(Vector mu, SymMatrix sigma)
      : mu_(std::move(mu)), sigma_(std::move(sigma)), factor_(cholesky(sigma_)) {
    if (mu_.size() != sigma_.dim()) throw Error(ErrorCode::DimensionMismatch, "mean and covariance dimensions differ");
    log_norm_ = -0.5 * (static_cast<double>(dim()) * kLog2Pi + factor_.log_determinant());
  }

  Eigen::Index dim() const noexcept { return mu_.size(); }
  const Vector& mu() const noexcept { return mu_; }
  const SymMatrix& sigma() const noexcept { return sigma_; }
  const LowerTriangularFactor& factor() const noexcept { return factor_; }

  template <typename Derived>
  double log_pdf(const Eigen::MatrixBase<Derived>& y) const {
    return log_norm_ - 0.5 * factor_.mahalanobis_sq(y - mu_);
  }

  template <typename Derived>
  double pdf(const Eigen::MatrixBase<Derived>& y) const { return std::exp(log_pdf(y)); }

  /// log density at every row of `points`.
  Vector log_pdf_rows(const Matrix& points) const {
    Matrix centered = (points.rowwise() - mu_.transpose()).transpose();
    factor_.lower().triangularView<Eigen::Lower>().solveInPlace(centered);
    return (log_norm_ - 0.5 * centered.colwise().squaredNorm().array()).transpose();
  }

  /// log of the density at the mean.
  double log_peak() const noexcept { return log_norm_; }

 private:
  Vector mu_;
  SymMatrix sigma_;
  LowerTriangularFactor factor_;
  double log_norm_ = 0.0;
};

inline double component_pdf(const Component& comp, const Vector& y) {
  if (y.size() != comp.dim()) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from component");
  return comp.pdf(y);
}

inline double log_sum_exp(std::span<const double> terms) {
  const double top = *std::max_element(terms.begin(), terms.end());
  if (!std::isfinite(top)) return top;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - top);
  return top + std::log(s);
}

/// Finite mixture of multivariate normals; weights positive, summing to 1.
class MixtureModel {
 public:
  MixtureModel(std::vector<double> weights, std::vector<Component> components)
      : w_(std::move(weights)), components_(std::move(components)) {
    if (w_.empty() || w_.size() != components_.size()) throw Error(ErrorCode::DimensionMismatch, "weights and components differ in count");
    const Eigen::Index d = components_.front().dim();
    double total = 0.0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
      if (!(w_[l] > 0.0)) throw Error(ErrorCode::InvalidArgument, "component weights must be positive");
      if (components_[l].dim() != d) throw Error(ErrorCode::DimensionMismatch, "components differ in dimension");
      total += w_[l];
    }
    if (std::abs(total - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "weights must sum to 1");
    log_w_.resize(w_.size());
    std::transform(w_.begin(), w_.end(), log_w_.begin(), [](double x) { return std::log(x); });
  }

  std::size_t c() const noexcept { return w_.size(); }
  Eigen::Index d() const noexcept { return components_.front().dim(); }
  const std::vector<double>& w() const noexcept { return w_; }
  const std::vector<Component>& components() const noexcept { return components_; }
  const Component& component(std::size_t l) const { return components_.at(l); }

  /// log(w_l) + log f(y | θ_l) for every component and every row: rows × c.
  Matrix joint_log_rows(const Matrix& points) const {
    Matrix out(points.rows(), static_cast<Eigen::Index>(c()));
    for (std::size_t l = 0; l < c(); ++l) out.col(static_cast<Eigen::Index>(l)) = components_[l].log_pdf_rows(points).array() + log_w_[l];
    return out;
  }

  template <typename Derived>
  double log_pdf(const Eigen::MatrixBase<Derived>& y) const {
    std::vector<double> terms(c());
    for (std::size_t l = 0; l < c(); ++l) terms[l] = log_w_[l] + components_[l].log_pdf(y);
    return log_sum_exp(terms);
  }

  /// log mixture density at every row.
  Vector log_pdf_rows(const Matrix& points) const {
    const Matrix joint = joint_log_rows(points);
    Vector out(points.rows());
    for (Eigen::Index j = 0; j < points.rows(); ++j) {
      const double top = joint.row(j).maxCoeff();
      out(j) = std::isfinite(top) ? top + std::log((joint.row(j).array() - top).exp().sum()) : top;
    }
    return out;
  }

 private:
  std::vector<double> w_;
  std::vector<double> log_w_;
  std::vector<Component> components_;
};

inline double mixture_pdf(const MixtureModel& model, const Vector& y) {
  if (y.size() != model.d()) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from model");
  return std::exp(model.log_pdf(y));
}

/// Responsibilities τ_l = w_l f(y|θ_l) / f(y), evaluated in the log domain.
inline Vector posterior_tau(const MixtureModel& model, const Vector& y) {
  if (y.size() != model.d()) throw Error(ErrorCode::DimensionMismatch, "point dimension differs from model");
  Vector joint(static_cast<Eigen::Index>(model.c()));
  for (std::size_t l = 0; l < model.c(); ++l)
    joint(static_cast<Eigen::Index>(l)) = std::log(model.w()[l]) + model.component(l).log_pdf(y);
  const double top = joint.maxCoeff();
  if (!std::isfinite(top)) throw Error(ErrorCode::ZeroDensity, "all component densities vanish");
  Vector tau = (joint.array() - top).exp();
  return tau / tau.sum();
}

/// Responsibilities for every row: rows × c.
inline Matrix posterior_rows(const MixtureModel& model, const Matrix& points) {
  Matrix joint = model.joint_log_rows(points);
  for (Eigen::Index j = 0; j < joint.rows(); ++j) {
    const double top = joint.row(j).maxCoeff();
    if (!std::isfinite(top)) throw Error(ErrorCode::ZeroDensity, "all component densities vanish at row " + std::to_string(j + 1));
    joint.row(j) = (joint.row(j).array() - top).exp();
    joint.row(j) /= joint.row(j).sum();
  }
  return joint;
}

/// Σ_j k_j log f(y_j) over weighted support points.
inline double log_likelihood(const MixtureModel& model, const Matrix& points, std::span<const double> weights) {
  if (points.cols() != model.d()) throw Error(ErrorCode::DimensionMismatch, "data dimension differs from model");
  const Vector lp = model.log_pdf_rows(points);
  double total = 0.0;
  for (Eigen::Index j = 0; j < lp.size(); ++j) {
    if (!std::isfinite(lp(j))) throw Error(ErrorCode::ZeroDensity, "density underflow at entry " + std::to_string(j + 1));
    total += weights[static_cast<std::size_t>(j)] * lp(j);
  }
  return total;
}

inline double log_likelihood(const MixtureModel& model, const EmpiricalSupport& s) {
  return log_likelihood(model, s.positions, s.frequency);
}

inline double log_likelihood(const MixtureModel& model, const HistogramGrid& grid) {
  return log_likelihood(model, to_support(grid));
}

inline double log_likelihood(const MixtureModel& model, const DensityPoints& points) {
  return log_likelihood(model, to_support(points));
}

inline double log_likelihood(const MixtureModel& model, const Dataset& data) {
  const std::vector<double> ones(static_cast<std::size_t>(data.n()), 1.0);
  return log_likelihood(model, data.values, ones);
}

/// First moment m and raw second moment V = Σ + m mᵀ with a running weight.
struct MomentPair {
  Vector m;
  Matrix V;
  double w = 0.0;
};

inline MomentPair moments_from_component(const Component& comp, double w) {
  return MomentPair{comp.mu(), comp.sigma().matrix() + comp.mu() * comp.mu().transpose(), w};
}

inline Component component_from_moments(const MomentPair& mp) {
  return Component(mp.m, SymMatrix(Matrix(mp.V - mp.m * mp.m.transpose())));
}

/// Draws n_l rows from component l as μ_l + L_l z; rows are grouped by
/// component and labelled with its 1-based index.
inline LabeledDataset sample(const MixtureModel& model, const std::vector<long>& n_per_component, SeededGenerator& rng,
                             const std::string& name = "sample") {
  if (n_per_component.size() != model.c()) throw Error(ErrorCode::DimensionMismatch, "one count per component required");
  long total = 0;
  for (long k : n_per_component) {
    if (k < 0) throw Error(ErrorCode::InvalidArgument, "counts must be non-negative");
    total += k;
  }
  if (total < 1) throw Error(ErrorCode::InvalidArgument, "at least one observation must be drawn");
  const Eigen::Index d = model.d();
  Matrix values(total, d);
  std::vector<int> labels;
  labels.reserve(static_cast<std::size_t>(total));
  Eigen::Index row = 0;
  Vector z(d);
  for (std::size_t l = 0; l < model.c(); ++l) {
    const Component& comp = model.component(l);
    for (long s = 0; s < n_per_component[l]; ++s) {
      for (Eigen::Index i = 0; i < d; ++i) z(i) = rng.normal();
      values.row(row++) = (comp.mu() + comp.factor().lower() * z).transpose();
      labels.push_back(static_cast<int>(l) + 1);
    }
  }
  return LabeledDataset(Dataset(name, std::move(values)), std::move(labels));
}

struct GeneratorSpec {
  Eigen::Index d = 2;
  std::size_t c = 1;
  long n = 1000;  // requested total; per-component counts are round(w_l n)
  std::pair<double, double> mu_range{-100.0, 100.0};
  std::pair<double, double> lambda_range{1.0, 100.0};
  std::uint64_t seed = 0;
};

struct GeneratedModel {
  MixtureModel model;
  std::vector<long> n_per_component;
};

/// Random mixture: w ~ U(0.1, 0.9) normalized, μ ~ U(mu_range)^d,
/// Σ = P Λ Pᵀ with Λ ~ U(lambda_range) and P a random orthonormal frame.
inline GeneratedModel generate_random_model(const GeneratorSpec& spec, SeededGenerator& rng) {
  if (spec.d < 1 || spec.c < 1 || spec.n < 1) throw Error(ErrorCode::InvalidArgument, "d, c and n must be positive");
  if (!(spec.mu_range.first <= spec.mu_range.second) || !(spec.lambda_range.first <= spec.lambda_range.second) ||
      !(spec.lambda_range.first > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "ranges must be ordered and eigenvalues positive");
  }
  std::vector<double> w(spec.c);
  for (double& x : w) x = rng.uniform(0.1, 0.9);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (double& x : w) x /= total;

  std::vector<Component> comps;
  for (std::size_t l = 0; l < spec.c; ++l) {
    Vector mu(spec.d);
    for (Eigen::Index i = 0; i < spec.d; ++i) mu(i) = rng.uniform(spec.mu_range.first, spec.mu_range.second);
    Vector lambda(spec.d);
    for (Eigen::Index i = 0; i < spec.d; ++i) lambda(i) = rng.uniform(spec.lambda_range.first, spec.lambda_range.second);
    const Matrix p = random_orthonormal(spec.d, rng);
    comps.emplace_back(std::move(mu), SymMatrix(Matrix(p * lambda.asDiagonal() * p.transpose())));
  }
  std::vector<long> counts(spec.c);
  for (std::size_t l = 0; l < spec.c; ++l) counts[l] = round_half_up(w[l] * static_cast<double>(spec.n));
  return GeneratedModel{MixtureModel(std::move(w), std::move(comps)), std::move(counts)};
}

inline GeneratedModel generate_random_model(const GeneratorSpec& spec) {
  SeededGenerator rng = SeededGenerator::substream(spec.seed, "generate");
  return generate_random_model(spec, rng);
}

}  // namespace mixcraft

#endif  // MIXCRAFT_MIXTURE_HPP
