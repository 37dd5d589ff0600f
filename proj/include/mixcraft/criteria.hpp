#ifndef MIXCRAFT_CRITERIA_HPP
#define MIXCRAFT_CRITERIA_HPP

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <string_view>

#include "mixcraft/error.hpp"
#include "mixcraft/mixture.hpp"
#include "mixcraft/preprocessing.hpp"

namespace mixcraft {

enum class CriterionKind { AIC, AIC3, AIC4, AICc, BIC, CAIC, HQC, MDL2, MDL5, AWE, CLC, ICL, ICL_BIC, PC, D, SSE };

inline constexpr std::array<std::pair<CriterionKind, std::string_view>, 16> kCriterionNames{{
    {CriterionKind::AIC, "AIC"},   {CriterionKind::AIC3, "AIC3"}, {CriterionKind::AIC4, "AIC4"},
    {CriterionKind::AICc, "AICc"}, {CriterionKind::BIC, "BIC"},   {CriterionKind::CAIC, "CAIC"},
    {CriterionKind::HQC, "HQC"},   {CriterionKind::MDL2, "MDL2"}, {CriterionKind::MDL5, "MDL5"},
    {CriterionKind::AWE, "AWE"},   {CriterionKind::CLC, "CLC"},   {CriterionKind::ICL, "ICL"},
    {CriterionKind::ICL_BIC, "ICL-BIC"}, {CriterionKind::PC, "PC"}, {CriterionKind::D, "D"},
    {CriterionKind::SSE, "SSE"},
}};

inline std::string to_string(CriterionKind kind) {
  for (const auto& [k, name] : kCriterionNames)
    if (k == kind) return std::string(name);
  return {};
}

/// Case-sensitive.
inline CriterionKind parse_criterion(std::string_view name) {
  for (const auto& [k, n] : kCriterionNames)
    if (n == name) return k;
  throw Error(ErrorCode::InvalidArgument, "unknown criterion '" + std::string(name) + "'");
}

struct FitStatistics {
  double logL = 0.0;
  long M = 1;
  long n = 1;
  double entropy = 0.0;  // EN
  double D = 0.0;
  double SSE = 0.0;
  double PC_raw = 1.0;
};

/// (c - 1) free weights plus d means and d(d+1)/2 covariances per component.
inline long degrees_of_freedom(long c, long d) {
  if (c < 1 || d < 1) throw Error(ErrorCode::InvalidArgument, "c and d must be positive");
  return (c - 1) + c * (d + d * (d + 1) / 2);
}

/// Lower is better for every kind; PC is returned negated.
inline double evaluate_criterion(CriterionKind kind, const FitStatistics& s) {
  const double m = static_cast<double>(s.M);
  const double n = static_cast<double>(s.n);
  const double dev = -2.0 * s.logL;
  switch (kind) {
    case CriterionKind::AIC: return dev + 2.0 * m;
    case CriterionKind::AIC3: return dev + 3.0 * m;
    case CriterionKind::AIC4: return dev + 4.0 * m;
    case CriterionKind::AICc:
      if (!(n > m + 1.0)) throw Error(ErrorCode::InsufficientN, "AICc needs n > M + 1");
      return dev + 2.0 * m * n / (n - m - 1.0);
    case CriterionKind::BIC: return dev + m * std::log(n);
    case CriterionKind::CAIC: return dev + m * (std::log(n) + 1.0);
    case CriterionKind::HQC: return dev + 2.0 * m * std::log(std::log(n));
    case CriterionKind::MDL2: return dev + 2.0 * m * std::log(n);
    case CriterionKind::MDL5: return dev + 5.0 * m * std::log(n);
    case CriterionKind::AWE: return -2.0 * (s.logL - s.entropy) + 2.0 * m * (1.5 + std::log(n));
    case CriterionKind::CLC: return dev + 2.0 * s.entropy;
    case CriterionKind::ICL: return dev + m * std::log(n) + 2.0 * s.entropy;
    case CriterionKind::ICL_BIC: return dev + 2.0 * s.entropy + m * std::log(n);
    case CriterionKind::PC: return -s.PC_raw;
    case CriterionKind::D: return s.D;
    case CriterionKind::SSE: return s.SSE;
  }
  return 0.0;
}

/// EN = -Σ_j k_j Σ_l τ_jl log τ_jl.
inline double assignment_entropy(const MixtureModel& model, const Matrix& points, std::span<const double> weights) {
  const Matrix tau = posterior_rows(model, points);
  double en = 0.0;
  for (Eigen::Index j = 0; j < tau.rows(); ++j) {
    double row = 0.0;
    for (Eigen::Index l = 0; l < tau.cols(); ++l) {
      const double t = tau(j, l);
      if (t > 0.0) row -= t * std::log(t);
    }
    en += weights[static_cast<std::size_t>(j)] * row;
  }
  return std::max(en, 0.0);
}

inline double assignment_entropy(const MixtureModel& model, const EmpiricalSupport& s) {
  return assignment_entropy(model, s.positions, s.frequency);
}

inline double assignment_entropy(const MixtureModel& model, const Dataset& data) {
  const std::vector<double> ones(static_cast<std::size_t>(data.n()), 1.0);
  return assignment_entropy(model, data.values, ones);
}

/// (1/n) Σ_j k_j Σ_l τ_jl².
inline double partition_coefficient(const MixtureModel& model, const EmpiricalSupport& s) {
  const Matrix tau = posterior_rows(model, s.positions);
  double pc = 0.0;
  for (Eigen::Index j = 0; j < tau.rows(); ++j) pc += s.frequency[static_cast<std::size_t>(j)] * tau.row(j).squaredNorm();
  return pc / static_cast<double>(s.n);
}

/// D = Σ_j max(0, (f_j - f̂_j)/f_j) k_j / n given predictive densities f̂_j.
inline double total_positive_relative_deviation(const EmpiricalSupport& s, std::span<const double> predictive) {
  double total = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double rel = (s.density[j] - predictive[j]) / s.density[j];
    if (rel > 0.0) total += rel * s.frequency[j];
  }
  return total / static_cast<double>(s.n);
}

inline std::vector<double> predictive_density(const MixtureModel& model, const EmpiricalSupport& s) {
  const Vector lp = model.log_pdf_rows(s.positions);
  std::vector<double> out(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) out[j] = std::exp(lp(static_cast<Eigen::Index>(j)));
  return out;
}

inline double total_positive_relative_deviation(const MixtureModel& model, const EmpiricalSupport& s) {
  return total_positive_relative_deviation(s, predictive_density(model, s));
}

/// Single weighted component w·f(y|θ) as the predictive density.
inline double total_positive_relative_deviation(const Component& comp, double w, const EmpiricalSupport& s) {
  const Vector lp = comp.log_pdf_rows(s.positions);
  std::vector<double> pred(s.size());
  for (std::size_t j = 0; j < s.size(); ++j) pred[j] = w * std::exp(lp(static_cast<Eigen::Index>(j)));
  return total_positive_relative_deviation(s, pred);
}

/// Σ_j k_j (f_j - f̂_j)².
inline double sse(const EmpiricalSupport& s, std::span<const double> predictive) {
  double total = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double r = s.density[j] - predictive[j];
    total += s.frequency[j] * r * r;
  }
  return total;
}

inline double sse(const MixtureModel& model, const EmpiricalSupport& s) { return sse(s, predictive_density(model, s)); }

/// All statistics of `model` on the preprocessed support.
namespace detail {

/// Adds frequency-weighted logL, entropy and the partition-coefficient sum
/// over the rows of a joint log-density matrix; returns the row densities.
inline Vector accumulate_rows(const Matrix& joint, const std::function<double(Eigen::Index)>& weight, FitStatistics& st, double& pc) {
  Vector density(joint.rows());
  for (Eigen::Index j = 0; j < joint.rows(); ++j) {
    const double k = weight(j);
    const double top = joint.row(j).maxCoeff();
    if (!std::isfinite(top)) throw Error(ErrorCode::ZeroDensity, "density underflow at entry " + std::to_string(j + 1));
    const Eigen::ArrayXd e = (joint.row(j).array() - top).exp();
    const double sum = e.sum();
    const double lp = top + std::log(sum);
    st.logL += k * lp;
    density(j) = std::exp(lp);
    double row_en = 0.0, row_pc = 0.0;
    for (Eigen::Index l = 0; l < e.size(); ++l) {
      const double t = e(l) / sum;
      if (t > 0.0) row_en -= t * std::log(t);
      row_pc += t * t;
    }
    st.entropy += k * row_en;
    pc += k * row_pc;
  }
  return density;
}

}  // namespace detail

/// Likelihood-based statistics (logL, entropy, PC) are taken over
/// `observations` when given, otherwise over the support entries weighted by
/// their frequencies. D and SSE always compare against the support.
inline FitStatistics compute_statistics(const MixtureModel& model, const EmpiricalSupport& s, const Matrix* observations = nullptr) {
  FitStatistics st;
  st.n = s.n;
  st.M = degrees_of_freedom(static_cast<long>(model.c()), static_cast<long>(model.d()));
  double pc = 0.0;
  Vector density;
  if (observations) {
    detail::accumulate_rows(model.joint_log_rows(*observations), [](Eigen::Index) { return 1.0; }, st, pc);
    st.n = observations->rows();
    density = model.log_pdf_rows(s.positions).array().exp();
  } else {
    density = detail::accumulate_rows(model.joint_log_rows(s.positions), [&](Eigen::Index j) { return s.frequency[static_cast<std::size_t>(j)]; }, st, pc);
  }
  st.entropy = std::max(st.entropy, 0.0);
  st.PC_raw = pc / static_cast<double>(st.n);
  const std::vector<double> pred(density.data(), density.data() + density.size());
  st.D = total_positive_relative_deviation(s, pred);
  st.SSE = sse(s, pred);
  return st;
}

}  // namespace mixcraft

#endif  // MIXCRAFT_CRITERIA_HPP
