#include <cmath>
#include <cstdlib>
#include <string>

#include "mafrg/core/error.hpp"
#include "mafrg/seqmetrics.hpp"

namespace mafrg::seqmetrics {

namespace {

// Mean of v; exactly v[0] when v is constant so that deviations vanish exactly.
double mean_of(const double* v, std::size_t n) {
  double s = 0.0;
  bool constant = true;
  for (std::size_t i = 0; i < n; ++i) {
    s += v[i];
    constant = constant && v[i] == v[0];
  }
  return constant ? v[0] : s / static_cast<double>(n);
}

// Pearson over two equal-length windows; 0 when either window is constant.
double pearson(const double* x, const double* y, std::size_t n) {
  const double mx = mean_of(x, n);
  const double my = mean_of(y, n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

double ccc(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ArgumentError("ccc: length mismatch (" + std::to_string(x.size()) + " vs " +
                        std::to_string(y.size()) + ")");
  if (x.size() < 2) throw ArgumentError("ccc: need at least 2 samples");
  const std::size_t n = x.size();
  const double mx = mean_of(x.data(), n);
  const double my = mean_of(y.data(), n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double dm = mx - my;
  const double denom = sxx * inv_n + syy * inv_n + dm * dm;
  if (denom == 0.0) return 1.0;
  return 2.0 * sxy * inv_n / denom;
}

double lagged_correlation(std::span<const double> x, std::span<const double> y, long lag) {
  if (x.size() != y.size()) throw ArgumentError("lagged_correlation: length mismatch");
  const std::size_t n = x.size();
  const std::size_t abs_lag = static_cast<std::size_t>(std::labs(lag));
  if (abs_lag >= n || n - abs_lag < 2)
    throw ArgumentError("lagged_correlation: |lag| = " + std::to_string(abs_lag) +
                        " leaves fewer than 2 overlapping frames of " + std::to_string(n));
  const std::size_t overlap = n - abs_lag;
  if (lag >= 0) return pearson(x.data(), y.data() + abs_lag, overlap);
  return pearson(x.data() + abs_lag, y.data(), overlap);
}

std::size_t tlcc_offset(std::span<const double> x, std::span<const double> y, std::size_t max_lag) {
  if (x.size() != y.size()) throw ArgumentError("tlcc_offset: length mismatch");
  if (max_lag >= x.size() || x.size() - max_lag < 2)
    throw ArgumentError("tlcc_offset: max_lag " + std::to_string(max_lag) +
                        " too large for sequence length " + std::to_string(x.size()));

  // Visiting 0, -1, +1, -2, +2, ... with a strict comparison encodes the tie rule.
  double best = lagged_correlation(x, y, 0);
  std::size_t best_abs = 0;
  bool all_zero = best == 0.0;
  for (std::size_t k = 1; k <= max_lag; ++k) {
    for (long lag : {-static_cast<long>(k), static_cast<long>(k)}) {
      const double r = lagged_correlation(x, y, lag);
      if (r != 0.0) all_zero = false;
      if (r > best) {
        best = r;
        best_abs = k;
      }
    }
  }
  return all_zero ? max_lag : best_abs;
}

}  // namespace mafrg::seqmetrics
