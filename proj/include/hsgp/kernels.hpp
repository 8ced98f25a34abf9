#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace hsgp {

enum class KernelFamily { SquaredExponential, Matern32, PeriodicSE };

// Stationary covariance description. alpha is the marginal variance (signal
// variance units); lengthscales has one entry per input dimension; omega0 is
// the angular frequency of the periodic kernel (PeriodicSE only, D = 1).
struct KernelSpec {
  KernelFamily family = KernelFamily::SquaredExponential;
  double alpha = 1.0;
  std::vector<double> lengthscales;
  std::optional<double> omega0;

  [[nodiscard]] int dim() const { return static_cast<int>(lengthscales.size()); }

  // Throws std::invalid_argument on violated invariants.
  void validate() const;
};

[[nodiscard]] KernelSpec make_se(double alpha, std::vector<double> lengthscales);
[[nodiscard]] KernelSpec make_matern32(double alpha, std::vector<double> lengthscales);
[[nodiscard]] KernelSpec make_periodic_se(double alpha, double lengthscale, double omega0);

// k(x, x2) for the spec's family; anisotropic (per-dimension lengthscale)
// forms for SE and Matern-3/2; PeriodicSE requires D = 1.
[[nodiscard]] double covariance(const KernelSpec& spec, const Eigen::VectorXd& x,
                                const Eigen::VectorXd& x2);

// Univariate spectral density S(omega), angular-frequency convention: the
// inverse transform carries the 1/(2pi) factor, so (1/2pi) Int S = k(0).
// SE and Matern-3/2 only; the periodic kernel has no density (line spectrum).
[[nodiscard]] double spectral_density(const KernelSpec& spec, double omega);

// D-dimensional anisotropic spectral density at frequency vector s.
[[nodiscard]] double spectral_density_multi(const KernelSpec& spec, const Eigen::VectorXd& s);

// Dense Gram matrix K_ij = covariance(spec, X.row(i), X.row(j)).
[[nodiscard]] Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X);

}  // namespace hsgp
