#ifndef MIXCRAFT_PREPROCESSING_HPP
#define MIXCRAFT_PREPROCESSING_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mixcraft/data.hpp"
#include "mixcraft/error.hpp"
#include "mixcraft/matrix.hpp"

namespace mixcraft {

enum class Preprocessing { Histogram, ParzenWindow, KNearestNeighbour };

inline const char* to_string(Preprocessing p) {
  switch (p) {
    case Preprocessing::Histogram: return "histogram";
    case Preprocessing::ParzenWindow: return "Parzen window";
    case Preprocessing::KNearestNeighbour: return "k-nearest neighbour";
  }
  return "";
}

inline Preprocessing parse_preprocessing(const std::string& name) {
  if (name == "histogram") return Preprocessing::Histogram;
  if (name == "Parzen window") return Preprocessing::ParzenWindow;
  if (name == "k-nearest neighbour") return Preprocessing::KNearestNeighbour;
  throw Error(ErrorCode::InvalidArgument, "unknown preprocessing '" + name + "'");
}

// Bin-count and neighbour-count rules, all rounded half up.

inline int sturges_rule(long n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  return static_cast<int>(round_half_up(1.0 + std::log2(static_cast<double>(n))));
}

inline int log10_rule(long n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  return std::max(1, static_cast<int>(round_half_up(10.0 * std::log10(static_cast<double>(n)))));
}

inline int rootn_rule(long n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  return std::max(1, static_cast<int>(round_half_up(2.0 * std::sqrt(static_cast<double>(n)))));
}

inline int knn_thumb(long n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be positive");
  return std::max(1, static_cast<int>(round_half_up(std::sqrt(static_cast<double>(n)))));
}

/// Strictly ascending candidate bin or neighbour counts.
struct KGrid {
  std::vector<int> candidates;
};

/// Up to `count` geometrically spaced integers from low to high inclusive.
inline KGrid geometric_grid(int low, int high, int count = 10) {
  KGrid grid;
  if (high <= low) {
    grid.candidates.push_back(std::max(1, low));
    return grid;
  }
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    const int k = static_cast<int>(round_half_up(low * std::pow(static_cast<double>(high) / low, t)));
    if (grid.candidates.empty() || k > grid.candidates.back()) grid.candidates.push_back(k);
  }
  grid.candidates.back() = std::max(grid.candidates.back(), high);
  return grid;
}

/// The "auto" grid: Sturges to RootN for bins, a band around sqrt(n) for
/// neighbours.
inline KGrid auto_grid(Preprocessing p, long n) {
  if (p == Preprocessing::KNearestNeighbour) {
    const int thumb = knn_thumb(n);
    const int low = std::max(2, static_cast<int>(round_half_up(thumb / 2.0)));
    const int high = static_cast<int>(std::min<long>(n, 2L * thumb));
    return geometric_grid(std::min(low, high), high);
  }
  return geometric_grid(sturges_rule(n), rootn_rule(n));
}

/// Optional per-dimension overrides for the binning/smoothing range.
struct RangeOptions {
  std::optional<Vector> y0;
  std::optional<Vector> ymin;
  std::optional<Vector> ymax;
};

/// Range used for widths: the union of supplied bounds and observed extremes.
struct DataRange {
  Vector low;
  Vector high;
  bool clipped = false;  // a supplied bound did not cover the data
};

inline DataRange resolve_range(const Dataset& data, const RangeOptions& opt) {
  DataRange r{data.values.colwise().minCoeff().transpose(), data.values.colwise().maxCoeff().transpose()};
  const Eigen::Index d = data.d();
  auto check_len = [d](const std::optional<Vector>& v, const char* what) {
    if (v && v->size() != d) throw Error(ErrorCode::DimensionMismatch, std::string(what) + " must have length d");
  };
  check_len(opt.y0, "y0");
  check_len(opt.ymin, "ymin");
  check_len(opt.ymax, "ymax");
  if (opt.ymin && opt.ymax && ((opt.ymin->array() >= opt.ymax->array()).any())) {
    throw Error(ErrorCode::DegenerateRange, "ymin must be below ymax");
  }
  if (opt.ymin) {
    r.clipped = r.clipped || (opt.ymin->array() > r.low.array()).any();
    r.low = r.low.cwiseMin(*opt.ymin);
  }
  if (opt.ymax) {
    r.clipped = r.clipped || (opt.ymax->array() < r.high.array()).any();
    r.high = r.high.cwiseMax(*opt.ymax);
  }
  for (Eigen::Index i = 0; i < d; ++i) {
    if (!(r.high(i) > r.low(i))) throw Error(ErrorCode::DegenerateRange, "zero range in dimension " + std::to_string(i + 1));
  }
  return r;
}

struct HistogramBin {
  std::vector<long> cell;  // integer bin coordinates relative to the origin
  Vector mean;             // bin center
  long frequency = 0;
  double density = 0.0;
};

/// Occupied bins of a d-dimensional histogram, ordered by row-major
/// linear index.
struct HistogramGrid {
  int v = 0;
  Vector h;
  Vector origin;
  std::vector<HistogramBin> bins;
  long n = 0;
  bool clipped = false;

  Eigen::Index d() const noexcept { return h.size(); }
  double cell_volume() const { return h.prod(); }
};

inline HistogramGrid build_histogram(const Dataset& data, int v, const RangeOptions& opt = {}) {
  if (v < 1) throw Error(ErrorCode::InvalidArgument, "v must be at least 1");
  const DataRange range = resolve_range(data, opt);
  const Eigen::Index d = data.d();
  HistogramGrid grid;
  grid.v = v;
  grid.n = static_cast<long>(data.n());
  grid.clipped = range.clipped;
  grid.h = (range.high - range.low) / static_cast<double>(v);
  grid.origin = opt.y0 ? *opt.y0 : range.low;

  std::map<std::vector<long>, long> counts;
  std::vector<long> cell(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < data.n(); ++j) {
    for (Eigen::Index i = 0; i < d; ++i) {
      long idx = static_cast<long>(std::floor((data.values(j, i) - grid.origin(i)) / grid.h(i)));
      if (!opt.y0) idx = std::clamp<long>(idx, 0, v - 1);  // topmost bin closed
      cell[static_cast<std::size_t>(i)] = idx;
    }
    ++counts[cell];
  }
  const double norm = static_cast<double>(grid.n) * grid.cell_volume();
  grid.bins.reserve(counts.size());
  for (const auto& [key, k] : counts) {
    HistogramBin bin;
    bin.cell = key;
    bin.mean.resize(d);
    for (Eigen::Index i = 0; i < d; ++i) bin.mean(i) = grid.origin(i) + (static_cast<double>(key[static_cast<std::size_t>(i)]) + 0.5) * grid.h(i);
    bin.frequency = k;
    bin.density = static_cast<double>(k) / norm;
    grid.bins.push_back(std::move(bin));
  }
  return grid;
}

/// Per-observation empirical densities (Parzen window or k-NN).
struct DensityPoints {
  Preprocessing mode = Preprocessing::ParzenWindow;
  int parameter = 0;      // v for Parzen, k for k-NN
  Vector h;               // representative smoothing widths
  Matrix positions;       // the observations themselves
  std::vector<double> density;
  Matrix cell_widths;     // per-observation box widths used for local counts
  long n = 0;
  bool clipped = false;

  Eigen::Index d() const noexcept { return positions.cols(); }
};

inline DensityPoints parzen_density(const Dataset& data, int v, const RangeOptions& opt = {}) {
  if (v < 1) throw Error(ErrorCode::InvalidArgument, "v must be at least 1");
  const DataRange range = resolve_range(data, opt);
  const Eigen::Index n = data.n(), d = data.d();
  DensityPoints out;
  out.mode = Preprocessing::ParzenWindow;
  out.parameter = v;
  out.n = static_cast<long>(n);
  out.clipped = range.clipped;
  out.h = (range.high - range.low) / static_cast<double>(v);
  out.positions = data.values;
  out.cell_widths = out.h.transpose().replicate(n, 1);

  // sweep along the first coordinate so each window scan is local
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return data.values(a, 0) < data.values(b, 0); });
  std::vector<double> first(static_cast<std::size_t>(n));
  for (Eigen::Index r = 0; r < n; ++r) first[static_cast<std::size_t>(r)] = data.values(order[static_cast<std::size_t>(r)], 0);

  const Vector half = 0.5 * out.h;
  const double norm = static_cast<double>(n) * out.h.prod();
  out.density.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double x0 = data.values(j, 0);
    auto lo = std::lower_bound(first.begin(), first.end(), x0 - half(0));
    auto hi = std::upper_bound(first.begin(), first.end(), x0 + half(0));
    long count = 0;
    for (auto it = lo; it != hi; ++it) {
      const Eigen::Index other = order[static_cast<std::size_t>(it - first.begin())];
      bool inside = true;
      for (Eigen::Index i = 1; i < d && inside; ++i) inside = std::abs(data.values(other, i) - data.values(j, i)) <= half(i);
      count += inside ? 1 : 0;
    }
    out.density[static_cast<std::size_t>(j)] = static_cast<double>(count) / norm;
  }
  return out;
}

inline double unit_ball_volume(Eigen::Index d) {
  const double dd = static_cast<double>(d);
  return std::pow(std::numbers::pi, dd / 2.0) / std::tgamma(dd / 2.0 + 1.0);
}

/// Sorted distances from every observation to its nearest neighbours (self
/// included as the first, at distance 0), in range-rescaled coordinates.
class NeighbourTable {
 public:
  NeighbourTable(const Dataset& data, int kmax, const RangeOptions& opt = {})
      : range_(resolve_range(data, opt)), kmax_(kmax) {
    const Eigen::Index n = data.n();
    if (kmax < 1 || kmax > n) throw Error(ErrorCode::InvalidArgument, "k must lie in [1, n]");
    const Vector scale = (range_.high - range_.low).cwiseInverse();
    const Matrix scaled = data.values * scale.asDiagonal();
    distances_.resize(n, kmax);
    std::vector<double> dist(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index o = 0; o < n; ++o) dist[static_cast<std::size_t>(o)] = (scaled.row(o) - scaled.row(j)).squaredNorm();
      std::partial_sort(dist.begin(), dist.begin() + kmax, dist.end());
      for (int k = 0; k < kmax; ++k) distances_(j, k) = std::sqrt(dist[static_cast<std::size_t>(k)]);
    }
    positions_ = data.values;
  }

  int kmax() const noexcept { return kmax_; }
  const DataRange& range() const noexcept { return range_; }

  DensityPoints density(int k) const {
    const Eigen::Index n = positions_.rows(), d = positions_.cols();
    if (k < 2 || k > kmax_) throw Error(ErrorCode::InvalidArgument, "k must lie in [2, kmax]");
    const Vector span = range_.high - range_.low;
    const double ball = unit_ball_volume(d) * span.prod();
    DensityPoints out;
    out.mode = Preprocessing::KNearestNeighbour;
    out.parameter = k;
    out.n = static_cast<long>(n);
    out.clipped = range_.clipped;
    out.positions = positions_;
    out.density.resize(static_cast<std::size_t>(n));
    out.cell_widths.resize(n, d);
    double mean_radius = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double r = distances_(j, k - 1);
      if (!(r > 0.0)) {
        throw Error(ErrorCode::DuplicatePointsExceedK, "observation " + std::to_string(j + 1) + " has at least k duplicates");
      }
      out.density[static_cast<std::size_t>(j)] = static_cast<double>(k) / (static_cast<double>(n) * ball * std::pow(r, static_cast<double>(d)));
      out.cell_widths.row(j) = (2.0 * r * span).transpose();
      mean_radius += r / static_cast<double>(n);
    }
    out.h = 2.0 * mean_radius * span;
    return out;
  }

 private:
  DataRange range_;
  int kmax_;
  Matrix positions_;
  Matrix distances_;
};

/// f_j = k / (n V_j), V_j the volume of the ball reaching the k-th nearest
/// neighbour (self counted) after rescaling each coordinate by its range.
inline DensityPoints knn_density(const Dataset& data, int k, const RangeOptions& opt = {}) {
  if (k < 2 || k > data.n()) throw Error(ErrorCode::InvalidArgument, "k must lie in [2, n]");
  return NeighbourTable(data, k, opt).density(k);
}

/// Uniform view over bins or points consumed by the estimator and criteria.
/// volume(j) = k_j / (n f_j) converts densities to frequencies.
struct EmpiricalSupport {
  Preprocessing mode = Preprocessing::Histogram;
  Matrix positions;
  std::vector<double> frequency;
  std::vector<double> density;
  Matrix cell_widths;
  long n = 0;
  int parameter = 0;
  Vector h;
  Vector origin;
  bool clipped = false;

  std::size_t size() const noexcept { return frequency.size(); }
  Eigen::Index d() const noexcept { return positions.cols(); }
  double volume(std::size_t j) const { return frequency[j] / (static_cast<double>(n) * density[j]); }
};

inline EmpiricalSupport to_support(const HistogramGrid& grid) {
  EmpiricalSupport s;
  s.mode = Preprocessing::Histogram;
  s.n = grid.n;
  s.parameter = grid.v;
  s.h = grid.h;
  s.origin = grid.origin;
  s.clipped = grid.clipped;
  const auto m = static_cast<Eigen::Index>(grid.bins.size());
  s.positions.resize(m, grid.d());
  s.cell_widths = grid.h.transpose().replicate(m, 1);
  for (Eigen::Index j = 0; j < m; ++j) {
    const auto& bin = grid.bins[static_cast<std::size_t>(j)];
    s.positions.row(j) = bin.mean.transpose();
    s.frequency.push_back(static_cast<double>(bin.frequency));
    s.density.push_back(bin.density);
  }
  return s;
}

inline EmpiricalSupport to_support(const DensityPoints& points) {
  EmpiricalSupport s;
  s.mode = points.mode;
  s.n = points.n;
  s.parameter = points.parameter;
  s.h = points.h;
  s.origin = points.positions.colwise().minCoeff().transpose();
  s.clipped = points.clipped;
  s.positions = points.positions;
  s.cell_widths = points.cell_widths;
  s.frequency.assign(points.density.size(), 1.0);
  s.density = points.density;
  return s;
}

struct GlobalMode {
  std::size_t index = 0;
  Vector position;
  double density = 0.0;    // residual empirical density at the mode
  double frequency = 0.0;  // residual frequency at the mode
};

/// Entry with the highest residual density f_j·r_j/k_j among entries with
/// r_j > 0. Ties go to the larger residual frequency, then the lower index.
inline GlobalMode global_mode(const EmpiricalSupport& s, std::span<const double> residual) {
  std::optional<std::size_t> best;
  double best_density = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    if (!(residual[j] > 0.0)) continue;
    const double f = s.density[j] * residual[j] / s.frequency[j];
    if (!best || f > best_density || (f == best_density && residual[j] > residual[*best])) {
      best = j;
      best_density = f;
    }
  }
  if (!best) throw Error(ErrorCode::EmptySelection, "no unassigned entries remain");
  return GlobalMode{*best, s.positions.row(static_cast<Eigen::Index>(*best)).transpose(), best_density, residual[*best]};
}

inline GlobalMode global_mode(const EmpiricalSupport& s) { return global_mode(s, s.frequency); }

/// Masked view: entries flagged in `assigned` are skipped.
inline GlobalMode global_mode(const HistogramGrid& grid, const std::vector<bool>& assigned = {}) {
  const EmpiricalSupport s = to_support(grid);
  std::vector<double> residual = s.frequency;
  for (std::size_t j = 0; j < assigned.size() && j < residual.size(); ++j)
    if (assigned[j]) residual[j] = 0.0;
  return global_mode(s, residual);
}

inline GlobalMode global_mode(const DensityPoints& points, const std::vector<bool>& assigned = {}) {
  const EmpiricalSupport s = to_support(points);
  std::vector<double> residual = s.frequency;
  for (std::size_t j = 0; j < assigned.size() && j < residual.size(); ++j)
    if (assigned[j]) residual[j] = 0.0;
  return global_mode(s, residual);
}

struct GoldenResult {
  int k = 0;
  double ic = 0.0;
  int evaluations = 0;
};

/// Integer golden-section search inside a valid bracket low < mid < high
/// with IC(mid) <= IC(low), IC(high). Each K is evaluated at most once.
inline GoldenResult golden_section_refine(int low, int mid, int high, const std::function<double(int)>& evaluate) {
  if (!(low < mid && mid < high)) throw Error(ErrorCode::InvalidBracket, "bracket must satisfy low < mid < high");
  std::map<int, double> memo;
  auto f = [&](int k) {
    auto it = memo.find(k);
    if (it != memo.end()) return it->second;
    const double value = evaluate(k);
    memo.emplace(k, value);
    return value;
  };
  const double fa = f(low), fc = f(high);
  double fb = f(mid);
  if (fb > fa || fb > fc) throw Error(ErrorCode::InvalidBracket, "mid does not improve on the bracket ends");

  constexpr double kGolden = 0.3819660112501051;  // 2 - phi
  int a = low, b = mid, c = high;
  while (c - a > 2) {
    int x;
    if (c - b > b - a) {
      x = std::clamp(b + static_cast<int>(round_half_up(kGolden * (c - b))), b + 1, c - 1);
    } else {
      x = std::clamp(b - static_cast<int>(round_half_up(kGolden * (b - a))), a + 1, b - 1);
    }
    const double fx = f(x);
    if (x > b) {
      if (fx < fb) { a = b; b = x; fb = fx; } else { c = x; }
    } else {
      if (fx < fb) { c = b; b = x; fb = fx; } else { a = x; }
    }
  }
  return GoldenResult{b, fb, static_cast<int>(memo.size())};
}

}  // namespace mixcraft

#endif  // MIXCRAFT_PREPROCESSING_HPP
