#pragma once

// Numerical primitives shared by the challenge metrics: multivariate DTW,
// concordance correlation, time-lagged cross-correlation and the Gaussian
// Frechet distance.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mafrg/core/frame_matrix.hpp"

namespace mafrg::seqmetrics {

enum class LocalCost { Euclidean, Manhattan };

enum class DtwNormalization {
  None,          // raw accumulated cost
  SumOfLengths,  // accumulated cost / (T_a + T_b)
};

struct DtwConfig {
  /// Sakoe-Chiba radius in frames; std::nullopt runs the full matrix.
  std::optional<std::size_t> band_radius;
  LocalCost local_cost = LocalCost::Euclidean;
  DtwNormalization normalization = DtwNormalization::None;
};

inline constexpr std::size_t kDefaultBandRadius = 75;

/// Accumulated cost of the optimal boundary-anchored monotone alignment with
/// steps (1,0), (0,1), (1,1). Both inputs are T x C with matching C.
double dtw(const FrameMatrix& a, const FrameMatrix& b, const DtwConfig& cfg = {});

/// Same, over row-major double buffers (rows_a x cols, rows_b x cols).
double dtw(std::span<const double> a, std::size_t rows_a, std::span<const double> b,
           std::size_t rows_b, std::size_t cols, const DtwConfig& cfg = {});

/// Lin's concordance correlation coefficient with population moments.
/// Both constant and equal -> 1; both constant and unequal -> 0.
double ccc(std::span<const double> x, std::span<const double> y);

/// Pearson correlation of x[t] against y[t + lag] over the overlapping window.
/// A zero-variance window on either side yields 0.
double lagged_correlation(std::span<const double> x, std::span<const double> y, long lag);

/// |lag| of the peak lagged correlation over [-max_lag, max_lag]. Ties go to the
/// smaller |lag|, then the negative lag. All-zero correlation saturates at max_lag.
std::size_t tlcc_offset(std::span<const double> x, std::span<const double> y, std::size_t max_lag);

struct GaussianSummary {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
  std::size_t count = 0;

  Eigen::Index dim() const { return mean.size(); }
};

/// Population mean and symmetrized covariance of N x D samples (N >= 2).
GaussianSummary fit_gaussian(const Eigen::MatrixXd& samples);

/// Builds a summary from a mean and the scatter matrix (sum of centered outer
/// products) about that mean.
GaussianSummary gaussian_from_moments(const Eigen::VectorXd& mean, const Eigen::MatrixXd& scatter,
                                      std::size_t count);

/// |mu1 - mu2|^2 + tr(S1 + S2 - 2 (S1 S2)^(1/2)), clamped at 0.
double frechet_distance(const GaussianSummary& g1, const GaussianSummary& g2);

}  // namespace mafrg::seqmetrics
