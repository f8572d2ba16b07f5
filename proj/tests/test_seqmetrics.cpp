#include <cmath>
#include <random>

#include "doctest.h"
#include "mafrg/core/error.hpp"
#include "mafrg/seqmetrics.hpp"
#include "test_support.hpp"

using namespace mafrg;
using namespace mafrg::seqmetrics;
namespace ts = testing_support;
using doctest::Approx;

TEST_CASE("dtw examples") {
  std::mt19937_64 rng(10);
  auto seq = ts::random_matrix(rng, 40, 25);
  CHECK(dtw(seq, seq) == 0.0);
  CHECK(dtw(seq, seq, {.band_radius = 0}) == 0.0);

  CHECK(dtw(ts::from_rows({{0}, {0}}), ts::from_rows({{1}, {1}})) == Approx(2.0).epsilon(1e-12));
  CHECK(dtw(ts::from_rows({{0}, {1}, {2}}), ts::from_rows({{0}, {1}, {1}, {2}})) == 0.0);
  // Same values via the oracle, so the frozen numbers above are grounded.
  CHECK(oracle::brute_force_dtw({{0}, {0}}, {{1}, {1}}) == 2.0);
  CHECK(oracle::brute_force_dtw({{0}, {1}, {2}}, {{0}, {1}, {1}, {2}}) == 0.0);
}

TEST_CASE("dtw errors") {
  CHECK_THROWS_AS(dtw(FrameMatrix(3, 2), FrameMatrix(3, 3)), ArgumentError);
  CHECK_THROWS_AS(dtw(FrameMatrix(0, 2), FrameMatrix(3, 2)), ArgumentError);
  try {
    dtw(FrameMatrix(10, 1), FrameMatrix(4, 1), {.band_radius = 3});
    FAIL("expected error");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("radius 3") != std::string::npos);
  }
  CHECK_NOTHROW(dtw(FrameMatrix(10, 1), FrameMatrix(4, 1), {.band_radius = 6}));
}

TEST_CASE("dtw matches exhaustive path enumeration") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t na = 1 + rng() % 8, nb = 1 + rng() % 8, c = 1 + rng() % 3;
    auto a = ts::random_matrix(rng, na, c, -1, 1);
    auto b = ts::random_matrix(rng, nb, c, -1, 1);
    CHECK(dtw(a, b) == Approx(oracle::brute_force_dtw(ts::to_oracle(a), ts::to_oracle(b))).epsilon(1e-12));
  }
}

TEST_CASE("dtw properties") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t na = 1 + rng() % 30, nb = 1 + rng() % 30;
    auto a = ts::random_matrix(rng, na, 4);
    auto b = ts::random_matrix(rng, nb, 4);
    const double full = dtw(a, b);
    CHECK(full >= 0.0);
    CHECK(full == dtw(b, a));
    const std::size_t gap = na > nb ? na - nb : nb - na;
    for (std::size_t r : {gap, gap + 1, gap + 5}) CHECK(full <= dtw(a, b, {.band_radius = r}));
    CHECK(dtw(a, b, {.band_radius = 1000}) == full);
  }
}

TEST_CASE("dtw manhattan and normalization") {
  auto a = ts::from_rows({{0, 0}, {1, 1}});
  auto b = ts::from_rows({{1, 0}, {1, 1}});
  CHECK(dtw(a, b, {.local_cost = LocalCost::Manhattan}) == 1.0);
  CHECK(dtw(a, b) == 1.0);
  CHECK(dtw(a, b, {.normalization = DtwNormalization::SumOfLengths}) == 0.25);
}

TEST_CASE("ccc examples") {
  std::vector<double> x{0.1, 0.5, 0.3, 0.9};
  CHECK(ccc(x, x) == Approx(1.0).epsilon(1e-12));
  CHECK(ccc(std::vector<double>{0, 1, 2}, std::vector<double>{2, 1, 0}) == Approx(-1.0).epsilon(1e-12));
  CHECK(ccc(std::vector<double>{1, 2, 3, 4}, std::vector<double>{2, 3, 4, 5}) ==
        Approx(2.5 / 3.5).epsilon(1e-12));
  CHECK(oracle::direct_ccc({1, 2, 3, 4}, {2, 3, 4, 5}) == Approx(2.5 / 3.5).epsilon(1e-12));
  CHECK(ccc(std::vector<double>{3, 3, 3}, std::vector<double>{3, 3, 3}) == 1.0);
  CHECK(ccc(std::vector<double>{3, 3, 3}, std::vector<double>{2, 2, 2}) == 0.0);
  CHECK_THROWS_AS(ccc(std::vector<double>{1, 2}, std::vector<double>{1, 2, 3}), ArgumentError);
  CHECK_THROWS_AS(ccc(std::vector<double>{1}, std::vector<double>{1}), ArgumentError);
}

TEST_CASE("ccc properties") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng() % 40;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = ts::unit(rng) * 2 - 1;
    for (auto& v : y) v = ts::unit(rng) * 3 - 0.5;
    const double c = ccc(x, y);
    CHECK(c == Approx(ccc(y, x)).epsilon(1e-12));
    CHECK(c == Approx(oracle::direct_ccc(x, y)).epsilon(1e-9));
    CHECK(std::abs(c) <= std::abs(oracle::direct_pearson(x, y)) + 1e-12);
    const double scale = 0.1 + ts::unit(rng) * 5, shift = ts::unit(rng) * 4 - 2;
    std::vector<double> xs(n), ys(n), xa(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = scale * x[i] + shift;
      ys[i] = scale * y[i] + shift;
      xa[i] = x[i] + 0.3;
    }
    CHECK(ccc(xs, ys) == Approx(c).epsilon(1e-9));
    CHECK(ccc(x, xa) < 1.0);
  }
}

TEST_CASE("lagged correlation") {
  std::mt19937_64 rng(14);
  auto x = ts::random_walk(rng, 200);
  CHECK(lagged_correlation(x, x, 0) == Approx(1.0).epsilon(1e-12));
  std::vector<double> flat(200, 0.4);
  for (long lag = -20; lag <= 20; ++lag) CHECK(lagged_correlation(x, flat, lag) == 0.0);

  // y[t] = x[t - 5]: the scan over all lags must peak at +5.
  std::vector<double> y(200);
  for (std::size_t t = 0; t < 200; ++t) y[t] = t >= 5 ? x[t - 5] : ts::unit(rng);
  long peak = 0;
  double best = -2;
  for (long lag = -30; lag <= 30; ++lag) {
    const double r = lagged_correlation(x, y, lag);
    if (r > best) best = r, peak = lag;
  }
  CHECK(peak == 5);
  CHECK(best == Approx(1.0).epsilon(1e-12));

  // Window matches the oracle on explicit slices.
  std::vector<double> xs(x.begin(), x.begin() + 190), ys(y.begin() + 10, y.end());
  CHECK(lagged_correlation(x, y, 10) == Approx(oracle::direct_pearson(xs, ys)).epsilon(1e-9));
  CHECK_THROWS_AS(lagged_correlation(x, y, 199), ArgumentError);
  CHECK_THROWS_AS(lagged_correlation(x, y, -200), ArgumentError);
}

TEST_CASE("tlcc_offset") {
  std::mt19937_64 rng(15);
  auto x = ts::random_walk(rng, 750);
  CHECK(tlcc_offset(x, x, 49) == 0);
  CHECK(tlcc_offset(x, std::vector<double>(750, 0.3), 49) == 49);
  CHECK(tlcc_offset(std::vector<double>(750, 0.3), x, 49) == 49);

  auto shifted = [&](long k) {
    std::vector<double> y(750);
    for (long t = 0; t < 750; ++t) {
      long src = t - k;
      y[t] = (src >= 0 && src < 750) ? x[src] : ts::unit(rng);
    }
    return y;
  };
  CHECK(tlcc_offset(x, shifted(7), 49) == 7);
  for (long k = -20; k <= 20; ++k) CHECK(tlcc_offset(x, shifted(k), 30) == static_cast<std::size_t>(std::labs(k)));
  CHECK_THROWS_AS(tlcc_offset(x, x, 750), ArgumentError);
}

TEST_CASE("tlcc tie-break prefers smaller lag") {
  // Period-2 signal: correlation is +1 at every even lag, so lag 0 must win.
  std::vector<double> x(20);
  for (std::size_t t = 0; t < 20; ++t) x[t] = t % 2;
  CHECK(tlcc_offset(x, x, 6) == 0);
  std::vector<double> y(20);
  for (std::size_t t = 0; t < 20; ++t) y[t] = (t + 1) % 2;
  CHECK(tlcc_offset(x, y, 6) == 1);
}

TEST_CASE("fit_gaussian") {
  Eigen::MatrixXd same(4, 3);
  same.rowwise() = Eigen::RowVector3d(0.1, 0.2, 0.3);
  auto g = fit_gaussian(same);
  CHECK((g.mean - Eigen::Vector3d(0.1, 0.2, 0.3)).norm() < 1e-15);
  CHECK(g.covariance.norm() == 0.0);

  Eigen::MatrixXd one_d(2, 1);
  one_d << 0, 2;
  auto g1 = fit_gaussian(one_d);
  CHECK(g1.mean(0) == 1.0);
  CHECK(g1.covariance(0, 0) == 1.0);

  Eigen::MatrixXd cross(4, 2);
  cross << 1, 0, -1, 0, 0, 1, 0, -1;
  auto g2 = fit_gaussian(cross);
  CHECK(g2.mean.norm() == 0.0);
  CHECK(g2.covariance(0, 0) == 0.5);
  CHECK(g2.covariance(1, 1) == 0.5);
  CHECK(g2.covariance(0, 1) == 0.0);

  CHECK_THROWS_AS(fit_gaussian(Eigen::MatrixXd(1, 3)), ArgumentError);
}

namespace {

GaussianSummary summary_1d(double mean, double var) {
  GaussianSummary g;
  g.mean = Eigen::VectorXd::Constant(1, mean);
  g.covariance = Eigen::MatrixXd::Constant(1, 1, var);
  g.count = 100;
  return g;
}

}  // namespace

TEST_CASE("frechet_distance closed forms") {
  CHECK(frechet_distance(summary_1d(0, 1), summary_1d(1, 4)) == Approx(2.0).epsilon(1e-12));
  CHECK(oracle::frechet_1d(0, 1, 1, 4) == 2.0);

  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 100; ++trial) {
    const double m1 = ts::unit(rng) * 4 - 2, m2 = ts::unit(rng) * 4 - 2;
    const double v1 = ts::unit(rng) * 3, v2 = ts::unit(rng) * 3;
    CHECK(std::abs(frechet_distance(summary_1d(m1, v1), summary_1d(m2, v2)) -
                   oracle::frechet_1d(m1, v1, m2, v2)) <= 1e-8);
  }

  // Diagonal covariances decompose into per-dimension 1-D terms.
  GaussianSummary a, b;
  a.mean = Eigen::Vector3d(0, 1, 2);
  b.mean = Eigen::Vector3d(1, 1, 0);
  a.covariance = Eigen::Vector3d(1, 0.25, 2).asDiagonal();
  b.covariance = Eigen::Vector3d(4, 1, 0).asDiagonal();
  const double expected = oracle::frechet_1d(0, 1, 1, 4) + oracle::frechet_1d(1, 0.25, 1, 1) +
                          oracle::frechet_1d(2, 2, 0, 0);
  CHECK(frechet_distance(a, b) == Approx(expected).epsilon(1e-10));
}

TEST_CASE("frechet_distance properties") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const int d = 1 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd s1(50, d), s2(60, d);
    for (int i = 0; i < s1.size(); ++i) s1.data()[i] = ts::unit(rng);
    for (int i = 0; i < s2.size(); ++i) s2.data()[i] = ts::unit(rng) * 2;
    auto g1 = fit_gaussian(s1), g2 = fit_gaussian(s2);
    CHECK(frechet_distance(g1, g1) == Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(frechet_distance(g1, g1)) < 1e-9);
    CHECK(frechet_distance(g1, g2) == Approx(frechet_distance(g2, g1)).epsilon(1e-9));
    CHECK(frechet_distance(g1, g2) > 0.0);
  }
  CHECK_THROWS_AS(frechet_distance(summary_1d(0, 1), fit_gaussian(Eigen::MatrixXd::Zero(3, 2))),
                  ArgumentError);
  GaussianSummary bad = summary_1d(0, -1);
  CHECK_THROWS_AS(frechet_distance(bad, summary_1d(0, 1)), Error);
}
