#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

#include "mafrg/core/error.hpp"
#include "mafrg/seqmetrics.hpp"

namespace mafrg::seqmetrics {

namespace {

constexpr double kNegativeEigenTolerance = 1e-6;

// Eigenvalues of a symmetric matrix with tiny negatives clamped to zero.
Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> psd_eigen(const Eigen::MatrixXd& m,
                                                        const char* what) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(std::string("frechet_distance: eigendecomposition of ") + what +
                " did not converge");
  const double lowest = solver.eigenvalues().minCoeff();
  if (lowest < -kNegativeEigenTolerance)
    throw Error(std::string("frechet_distance: ") + what + " has eigenvalue " +
                std::to_string(lowest) + " below -1e-6");
  return solver;
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

GaussianSummary gaussian_from_moments(const Eigen::VectorXd& mean, const Eigen::MatrixXd& scatter,
                                      std::size_t count) {
  if (count < 2) throw ArgumentError("fit_gaussian: need at least 2 samples, got " + std::to_string(count));
  GaussianSummary g;
  g.mean = mean;
  g.covariance = symmetrized(scatter / static_cast<double>(count));
  g.count = count;
  return g;
}

GaussianSummary fit_gaussian(const Eigen::MatrixXd& samples) {
  const auto n = static_cast<std::size_t>(samples.rows());
  if (n < 2) throw ArgumentError("fit_gaussian: need at least 2 samples, got " + std::to_string(n));
  Eigen::VectorXd mean = samples.colwise().mean().transpose();
  Eigen::MatrixXd centered = samples.rowwise() - mean.transpose();
  return gaussian_from_moments(mean, centered.transpose() * centered, n);
}

double frechet_distance(const GaussianSummary& g1, const GaussianSummary& g2) {
  if (g1.dim() != g2.dim())
    throw ArgumentError("frechet_distance: dimension mismatch (" + std::to_string(g1.dim()) +
                        " vs " + std::to_string(g2.dim()) + ")");
  const double mean_term = (g1.mean - g2.mean).squaredNorm();

  // tr((S1 S2)^(1/2)) == tr((S1^(1/2) S2 S1^(1/2))^(1/2)); the latter is symmetric PSD.
  auto eig1 = psd_eigen(symmetrized(g1.covariance), "first covariance");
  Eigen::VectorXd root_vals = eig1.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd root1 = eig1.eigenvectors() * root_vals.asDiagonal() * eig1.eigenvectors().transpose();

  Eigen::MatrixXd product = symmetrized(root1 * g2.covariance * root1);
  auto eig_prod = psd_eigen(product, "covariance product");
  const double trace_root = eig_prod.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();

  const double d = mean_term + g1.covariance.trace() + g2.covariance.trace() - 2.0 * trace_root;
  return d > 0.0 ? d : 0.0;
}

}  // namespace mafrg::seqmetrics
