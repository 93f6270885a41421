#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "ganeye/error.hpp"
#include "ganeye/geometry.hpp"

namespace ganeye::stats {

struct Description {
  std::size_t n = 0;
  double mean = 0.0;
  std::optional<double> sd;  // sample sd (n - 1 divisor); unset when n < 2
};

/// Mean and sample standard deviation via Welford's update.
inline Description describe(std::span<const double> values) {
  if (values.empty()) throw InvalidInput("describe: empty sample");
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t k = 0;
  for (double v : values) {
    ++k;
    const double delta = v - mean;
    mean += delta / static_cast<double>(k);
    m2 += delta * (v - mean);
  }
  Description d;
  d.n = k;
  d.mean = mean;
  if (k >= 2) d.sd = std::sqrt(std::max(0.0, m2) / static_cast<double>(k - 1));
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the two
/// empirical CDFs, evaluated at every point of the merged sorted support.
inline double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw InvalidInput("ks_two_sample: empty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::ranges::sort(sa);
  std::ranges::sort(sb);
  const auto n = static_cast<double>(sa.size());
  const auto m = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() || j < sb.size()) {
    double t;
    if (j == sb.size() || (i < sa.size() && sa[i] <= sb[j])) {
      t = sa[i];
    } else {
      t = sb[j];
    }
    while (i < sa.size() && sa[i] <= t) ++i;
    while (j < sb.size() && sb[j] <= t) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  return d;
}

/// Asymptotic two-sided p-value of the KS statistic (Kolmogorov series).
inline double ks_pvalue(double d, std::size_t n, std::size_t m) {
  if (!(d >= 0.0 && d <= 1.0)) throw InvalidInput("ks_pvalue: D must lie in [0, 1]");
  if (n == 0 || m == 0) throw InvalidInput("ks_pvalue: sample sizes must be positive");
  const double nn = static_cast<double>(n);
  const double mm = static_cast<double>(m);
  const double lambda = d * std::sqrt(nn * mm / (nn + mm));
  // Below 0.15 the tail is 1 to within 1e-20; the series would need
  // O(1/lambda) terms to reach the truncation size.
  if (lambda < 0.15) return 1.0;
  double sum = 0.0;
  for (int k = 1; k < 100000; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

struct Histogram {
  std::vector<double> edges;
  std::vector<std::size_t> counts;
  std::size_t overflow = 0;  // values outside every bin (including NaN)
};

/// Bins are half-open [e_i, e_{i+1}) except the last, which is closed.
inline Histogram histogram(std::span<const double> values, std::span<const double> edges) {
  if (edges.size() < 2) throw InvalidInput("histogram: need at least two bin edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) throw InvalidInput("histogram: bin edges must be strictly increasing");
  }
  Histogram h;
  h.edges.assign(edges.begin(), edges.end());
  h.counts.assign(edges.size() - 1, 0);
  for (double v : values) {
    if (!(v >= edges.front() && v <= edges.back())) {
      ++h.overflow;
      continue;
    }
    auto it = std::upper_bound(edges.begin(), edges.end(), v);
    auto bin = static_cast<std::size_t>(it - edges.begin()) - 1;
    if (bin >= h.counts.size()) bin = h.counts.size() - 1;  // v == last edge
    ++h.counts[bin];
  }
  return h;
}

/// Linear-interpolation quantile of sorted data (the common "type 7").
inline double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile of empty sample");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

/// Silverman's rule of thumb, 0.9 * min(sd, IQR/1.34) * n^(-1/5). Falls back
/// to the sd term when the IQR vanishes but the sd does not.
inline double silverman_bandwidth(std::span<const double> values) {
  if (values.size() < 2) throw InvalidInput("kde: automatic bandwidth needs at least two values");
  const auto d = describe(values);
  const double sd = *d.sd;
  if (!(sd > 0.0)) {
    throw InvalidInput("kde: data has zero spread; pass an explicit bandwidth");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::ranges::sort(sorted);
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd;
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

/// Scott's rule per axis for a bivariate product kernel, sd * n^(-1/6).
inline double scott_bandwidth_2d(std::span<const double> axis_values) {
  if (axis_values.size() < 2) throw InvalidInput("kde_2d: automatic bandwidth needs at least two points");
  const double sd = *describe(axis_values).sd;
  if (!(sd > 0.0)) {
    throw InvalidInput("kde_2d: points have zero spread along an axis; pass explicit bandwidths");
  }
  return sd * std::pow(static_cast<double>(axis_values.size()), -1.0 / 6.0);
}

inline double gaussian_pdf(double u) {
  return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi);
}

struct DensityGrid1D {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
  std::size_t n = 0;
};

struct DensityGrid2D {
  std::vector<double> xs;
  std::vector<double> ys;
  std::vector<double> values;  // row-major over ys: values[iy * xs.size() + ix]
  double bandwidth_x = 0.0;
  double bandwidth_y = 0.0;
  std::size_t n = 0;

  double at(std::size_t ix, std::size_t iy) const { return values[iy * xs.size() + ix]; }
};

inline void check_axis(std::span<const double> axis, const char* what) {
  if (axis.empty()) throw InvalidInput(std::string(what) + ": empty grid axis");
  for (std::size_t i = 1; i < axis.size(); ++i) {
    if (!(axis[i] > axis[i - 1])) throw InvalidInput(std::string(what) + ": grid must be strictly increasing");
  }
}

/// Gaussian kernel density estimate evaluated on `grid`.
inline DensityGrid1D kde_1d(std::span<const double> values, std::span<const double> grid,
                            std::optional<double> bandwidth = std::nullopt) {
  if (values.empty()) throw InvalidInput("kde_1d: empty sample");
  check_axis(grid, "kde_1d");
  const double h = bandwidth ? *bandwidth : silverman_bandwidth(values);
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidInput("kde_1d: bandwidth must be positive");
  DensityGrid1D out;
  out.grid.assign(grid.begin(), grid.end());
  out.values.resize(grid.size());
  out.bandwidth = h;
  out.n = values.size();
  const double norm = 1.0 / (static_cast<double>(values.size()) * h);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double acc = 0.0;
    for (double x : values) acc += gaussian_pdf((grid[g] - x) / h);
    out.values[g] = acc * norm;
  }
  return out;
}

/// Product-Gaussian kernel density estimate on the lattice xs x ys.
inline DensityGrid2D kde_2d(std::span<const NormPoint> points, std::span<const double> xs,
                            std::span<const double> ys,
                            std::optional<std::pair<double, double>> bandwidths = std::nullopt) {
  if (points.empty()) throw InvalidInput("kde_2d: empty sample");
  check_axis(xs, "kde_2d");
  check_axis(ys, "kde_2d");
  double hx, hy;
  if (bandwidths) {
    std::tie(hx, hy) = *bandwidths;
  } else {
    std::vector<double> px, py;
    px.reserve(points.size());
    py.reserve(points.size());
    for (const auto& p : points) {
      px.push_back(p.x);
      py.push_back(p.y);
    }
    hx = scott_bandwidth_2d(px);
    hy = scott_bandwidth_2d(py);
  }
  if (!(hx > 0.0) || !(hy > 0.0)) throw InvalidInput("kde_2d: bandwidths must be positive");

  // Separable kernel: precompute per-axis factors, then sum outer products.
  std::vector<double> kx(points.size() * xs.size());
  std::vector<double> ky(points.size() * ys.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    for (std::size_t i = 0; i < xs.size(); ++i) kx[p * xs.size() + i] = gaussian_pdf((xs[i] - points[p].x) / hx);
    for (std::size_t i = 0; i < ys.size(); ++i) ky[p * ys.size() + i] = gaussian_pdf((ys[i] - points[p].y) / hy);
  }
  DensityGrid2D out;
  out.xs.assign(xs.begin(), xs.end());
  out.ys.assign(ys.begin(), ys.end());
  out.values.assign(xs.size() * ys.size(), 0.0);
  out.bandwidth_x = hx;
  out.bandwidth_y = hy;
  out.n = points.size();
  const double norm = 1.0 / (static_cast<double>(points.size()) * hx * hy);
  for (std::size_t iy = 0; iy < ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < xs.size(); ++ix) {
      double acc = 0.0;
      for (std::size_t p = 0; p < points.size(); ++p) acc += kx[p * xs.size() + ix] * ky[p * ys.size() + iy];
      out.values[iy * xs.size() + ix] = acc * norm;
    }
  }
  return out;
}

/// `count` evenly spaced values from lo to hi inclusive.
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw InvalidInput("linspace: need count >= 2 and hi > lo");
  std::vector<double> out(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo + step * static_cast<double>(i);
  out.back() = hi;
  return out;
}

}  // namespace ganeye::stats
