#ifndef MIXCRAFT_MATRIX_HPP
#define MIXCRAFT_MATRIX_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "mixcraft/error.hpp"
#include "mixcraft/rng.hpp"

namespace mixcraft {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Dense symmetric matrix. Construction averages the input with its
/// transpose, so entries(i, j) == entries(j, i) holds bit-exactly afterwards.
class SymMatrix {
 public:
  SymMatrix() = default;

  explicit SymMatrix(const Matrix& m) {
    if (m.rows() != m.cols() || m.rows() < 1) {
      throw Error(ErrorCode::DimensionMismatch, "symmetric matrix must be square and non-empty");
    }
    m_ = 0.5 * (m + m.transpose());
  }

  static SymMatrix identity(Eigen::Index d) { return SymMatrix(Matrix::Identity(d, d)); }

  static SymMatrix diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

  Eigen::Index dim() const noexcept { return m_.rows(); }
  double operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  Vector diag() const { return m_.diagonal(); }

  SymMatrix scaled(double factor) const { return SymMatrix(Matrix(factor * m_)); }

  friend bool operator==(const SymMatrix& a, const SymMatrix& b) { return a.m_ == b.m_; }

 private:
  Matrix m_;
};

/// Lower-triangular Cholesky factor L with L Lᵀ = Σ.
class LowerTriangularFactor {
 public:
  explicit LowerTriangularFactor(Matrix lower) : l_(std::move(lower)) {}

  const Matrix& lower() const noexcept { return l_; }
  Eigen::Index dim() const noexcept { return l_.rows(); }

  double log_determinant() const { return 2.0 * l_.diagonal().array().log().sum(); }

  /// (y - mu)ᵀ Σ⁻¹ (y - mu) via a forward solve.
  double mahalanobis_sq(const Vector& y, const Vector& mu) const {
    Vector z = l_.triangularView<Eigen::Lower>().solve(y - mu);
    return z.squaredNorm();
  }

  template <typename Derived>
  double mahalanobis_sq(const Eigen::MatrixBase<Derived>& delta) const {
    Vector z = l_.triangularView<Eigen::Lower>().solve(delta);
    return z.squaredNorm();
  }

 private:
  Matrix l_;
};

/// Pivots below this fraction of the largest diagonal entry are treated as
/// loss of positive definiteness.
inline constexpr double kPivotTolerance = 1e-12;

inline LowerTriangularFactor cholesky(const SymMatrix& m) {
  const Eigen::Index d = m.dim();
  const Matrix& a = m.matrix();
  const double max_diag = a.diagonal().maxCoeff();
  if (!(max_diag > 0.0) || !std::isfinite(max_diag)) {
    throw Error(ErrorCode::NotPositiveDefinite, "non-positive diagonal");
  }
  const double floor = kPivotTolerance * max_diag;
  Matrix l = Matrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    double pivot = a(j, j);
    for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > floor)) {
      throw Error(ErrorCode::NotPositiveDefinite, "pivot " + std::to_string(j) + " is " + std::to_string(pivot));
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < d; ++i) {
      double s = a(i, j);
      for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return LowerTriangularFactor(std::move(l));
}

inline double determinant(const SymMatrix& m) { return std::exp(cholesky(m).log_determinant()); }

inline double log_determinant(const SymMatrix& m) { return cholesky(m).log_determinant(); }

inline SymMatrix inverse(const SymMatrix& m) {
  const LowerTriangularFactor f = cholesky(m);
  const Matrix identity = Matrix::Identity(m.dim(), m.dim());
  Matrix linv = f.lower().triangularView<Eigen::Lower>().solve(identity);
  return SymMatrix(Matrix(linv.transpose() * linv));
}

/// R = diag(C)^{-1/2} C diag(C)^{-1/2}.
inline SymMatrix correlation_from_covariance(const SymMatrix& c) {
  const Vector diag = c.diag();
  if ((diag.array() <= 0.0).any()) {
    throw Error(ErrorCode::ZeroVariance, "covariance has a non-positive diagonal entry");
  }
  const Vector inv_sd = diag.array().sqrt().inverse();
  Matrix r = inv_sd.asDiagonal() * c.matrix() * inv_sd.asDiagonal();
  r.diagonal().setOnes();
  r = r.cwiseMax(-1.0).cwiseMin(1.0);
  return SymMatrix(r);
}

/// Σ = diag(σ²)^{1/2} R diag(σ²)^{1/2}.
inline SymMatrix covariance_from_correlation(const SymMatrix& r, std::span<const double> sigma_sq) {
  if (static_cast<Eigen::Index>(sigma_sq.size()) != r.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "variance vector length differs from correlation dimension");
  }
  Vector sd(r.dim());
  for (Eigen::Index i = 0; i < r.dim(); ++i) {
    if (!(sigma_sq[static_cast<std::size_t>(i)] > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "variances must be positive");
    }
    sd(i) = std::sqrt(sigma_sq[static_cast<std::size_t>(i)]);
  }
  Matrix s = sd.asDiagonal() * r.matrix() * sd.asDiagonal();
  for (Eigen::Index i = 0; i < r.dim(); ++i) s(i, i) = sigma_sq[static_cast<std::size_t>(i)];
  return SymMatrix(s);
}

inline SymMatrix covariance_from_correlation(const SymMatrix& r, const Vector& sigma_sq) {
  return covariance_from_correlation(r, std::span<const double>(sigma_sq.data(), static_cast<std::size_t>(sigma_sq.size())));
}

/// Left singular frame of a d×d matrix of uniform(-1, 1) draws.
inline Matrix random_orthonormal(Eigen::Index d, SeededGenerator& rng) {
  if (d < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  for (;;) {
    Matrix a(d, d);
    // column-major fill, matching matrix(runif(d * d), nc = d)
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) a(i, j) = rng.uniform(-1.0, 1.0);
    Eigen::JacobiSVD<Matrix> svd(a, Eigen::ComputeFullU);
    const Vector& s = svd.singularValues();
    if (s(d - 1) > 1e-8 * std::max(1.0, s(0))) return svd.matrixU();
  }
}

}  // namespace mixcraft

#endif  // MIXCRAFT_MATRIX_HPP
