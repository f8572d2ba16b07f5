#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mafrg/core/error.hpp"
#include "mafrg/seqmetrics.hpp"

namespace mafrg::seqmetrics {

namespace {

template <LocalCost Cost>
double local_cost(const double* x, const double* y, std::size_t cols) {
  double acc = 0.0;
  if constexpr (Cost == LocalCost::Euclidean) {
    for (std::size_t k = 0; k < cols; ++k) {
      const double d = x[k] - y[k];
      acc += d * d;
    }
    return std::sqrt(acc);
  } else {
    for (std::size_t k = 0; k < cols; ++k) acc += std::abs(x[k] - y[k]);
    return acc;
  }
}

// Two-row DP restricted to |i - j| <= radius. Cells outside the band stay +inf.
template <LocalCost Cost>
double dtw_rows(const double* a, std::size_t na, const double* b, std::size_t nb, std::size_t cols,
                std::size_t radius) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(nb, inf), curr(nb, inf);
  for (std::size_t i = 0; i < na; ++i) {
    const std::size_t lo = i > radius ? i - radius : 0;
    const std::size_t hi = std::min(nb - 1, i + radius);
    const double* ai = a + i * cols;
    double left = inf;
    for (std::size_t j = lo; j <= hi; ++j) {
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = std::min(left, prev[j]);
        if (j > 0) best = std::min(best, prev[j - 1]);
      }
      left = local_cost<Cost>(ai, b + j * cols, cols) + best;
      curr[j] = left;
    }
    if (lo > 0) curr[lo - 1] = inf;
    std::swap(prev, curr);
  }
  return prev[nb - 1];
}

}  // namespace

double dtw(std::span<const double> a, std::size_t rows_a, std::span<const double> b,
           std::size_t rows_b, std::size_t cols, const DtwConfig& cfg) {
  if (rows_a == 0 || rows_b == 0) throw ArgumentError("dtw: sequences must have at least one frame");
  if (a.size() != rows_a * cols || b.size() != rows_b * cols)
    throw ArgumentError("dtw: channel mismatch");

  std::size_t radius = std::max(rows_a, rows_b);
  if (cfg.band_radius) {
    radius = *cfg.band_radius;
    const std::size_t gap = rows_a > rows_b ? rows_a - rows_b : rows_b - rows_a;
    if (gap > radius)
      throw ArgumentError("dtw: band radius " + std::to_string(radius) +
                          " admits no path between lengths " + std::to_string(rows_a) + " and " +
                          std::to_string(rows_b));
  }

  const double cost = cfg.local_cost == LocalCost::Euclidean
                          ? dtw_rows<LocalCost::Euclidean>(a.data(), rows_a, b.data(), rows_b, cols, radius)
                          : dtw_rows<LocalCost::Manhattan>(a.data(), rows_a, b.data(), rows_b, cols, radius);
  if (cfg.normalization == DtwNormalization::SumOfLengths)
    return cost / static_cast<double>(rows_a + rows_b);
  return cost;
}

double dtw(const FrameMatrix& a, const FrameMatrix& b, const DtwConfig& cfg) {
  if (a.cols() != b.cols())
    throw ArgumentError("dtw: channel mismatch (" + std::to_string(a.cols()) + " vs " +
                        std::to_string(b.cols()) + ")");
  std::vector<double> da(a.data().begin(), a.data().end());
  std::vector<double> db(b.data().begin(), b.data().end());
  return dtw(da, a.rows(), db, b.rows(), a.cols(), cfg);
}

}  // namespace mafrg::seqmetrics
