#pragma once

// Independent reference implementations used only by tests. None of these
// share code paths with the library: DTW is exhaustive path enumeration,
// correlations are computed from raw moment sums, and the Frechet checks use
// closed forms.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;  // rows = frames

inline double euclid(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t k = 0; k < x.size(); ++k) s += (x[k] - y[k]) * (x[k] - y[k]);
  return std::sqrt(s);
}

/// Minimum over every monotone (1,0)/(0,1)/(1,1) path from (0,0) to the end.
inline double brute_force_dtw(const Matrix& a, const Matrix& b) {
  const std::size_t na = a.size(), nb = b.size();
  std::vector<std::vector<double>> cost(na, std::vector<double>(nb));
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) cost[i][j] = euclid(a[i], b[j]);
  double best = std::numeric_limits<double>::infinity();
  std::function<void(std::size_t, std::size_t, double)> walk = [&](std::size_t i, std::size_t j,
                                                                   double acc) {
    acc += cost[i][j];
    if (i == na - 1 && j == nb - 1) {
      best = std::min(best, acc);
      return;
    }
    if (i + 1 < na) walk(i + 1, j, acc);
    if (j + 1 < nb) walk(i, j + 1, acc);
    if (i + 1 < na && j + 1 < nb) walk(i + 1, j + 1, acc);
  };
  walk(0, 0, 0.0);
  return best;
}

/// CCC from raw sums: 2 (E[xy] - E[x]E[y]) / (Var x + Var y + (Ex - Ey)^2).
inline double direct_ccc(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double mx = sx / n, my = sy / n;
  const double vx = sxx / n - mx * mx, vy = syy / n - my * my, cov = sxy / n - mx * my;
  const double denom = vx + vy + (mx - my) * (mx - my);
  if (std::abs(denom) < 1e-15) return 1.0;
  return 2 * cov / denom;
}

inline double direct_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double vx = sxx / n - (sx / n) * (sx / n);
  const double vy = syy / n - (sy / n) * (sy / n);
  if (vx <= 1e-15 || vy <= 1e-15) return 0.0;
  return (sxy / n - (sx / n) * (sy / n)) / std::sqrt(vx * vy);
}

/// 1-D Frechet distance between N(m1, v1) and N(m2, v2).
inline double frechet_1d(double m1, double v1, double m2, double v2) {
  const double s = std::sqrt(v1) - std::sqrt(v2);
  return (m1 - m2) * (m1 - m2) + s * s;
}

/// Mean squared difference between two equally shaped frame matrices.
inline double mse(const Matrix& a, const Matrix& b) {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t c = 0; c < a[t].size(); ++c, ++n) s += (a[t][c] - b[t][c]) * (a[t][c] - b[t][c]);
  return s / static_cast<double>(n);
}

}  // namespace oracle
