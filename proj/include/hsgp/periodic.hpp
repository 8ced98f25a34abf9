#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>

namespace hsgp {

// Cosine-series expansion of the periodic squared-exponential kernel:
// k(tau) ~ alpha sum_{j=0}^{J} qsq_j cos(j omega0 tau). coeffs holds the
// variance coefficients qsq_0..qsq_J, which depend on the lengthscale only;
// the overall sqrt(alpha) is applied at model level.
struct PeriodicBasis {
  int J = 0;
  double omega0 = 1.0;
  Eigen::VectorXd coeffs;  // length J + 1, all > 0
  std::string scheme;      // "bessel" | "truncated"
};

// Modified Bessel function of the first kind, I_order(z), by ascending power
// series truncated at 1e-16 relative. Throws std::range_error for z > 700
// (exp overflow guard).
[[nodiscard]] double bessel_i(int order, double z);

// qsq_0 = I_0(1/ell^2) / exp(1/ell^2); qsq_j = 2 I_j(1/ell^2) / exp(1/ell^2).
[[nodiscard]] PeriodicBasis periodic_coefficients(double lengthscale, int J,
                                                  double omega0 = 1.0);

// J-th order Taylor truncation of the same coefficients: finite double sum
// with inner index i <= floor((J - j) / 2). Retained for the cross-scheme
// convergence check; the Bessel form is authoritative.
[[nodiscard]] PeriodicBasis periodic_coefficients_truncated(double lengthscale, int J,
                                                            double omega0 = 1.0);

// alpha sum_j qsq_j cos(j omega0 tau); even in tau, period 2 pi / omega0.
[[nodiscard]] double periodic_approx_cov(const PeriodicBasis& basis, double alpha, double tau);

// n x (2J + 1) features: [sqrt(qsq_j) cos(j omega0 x) for j = 0..J,
// sqrt(qsq_j) sin(j omega0 x) for j = 1..J]. With standard-normal weights the
// implied prior covariance is periodic_approx_cov / alpha.
[[nodiscard]] Eigen::MatrixXd periodic_design_matrix(const Eigen::VectorXd& x,
                                                     const PeriodicBasis& basis);

// Smallest J whose normalized total-variation error over one period is below
// 0.5%. nullopt when the cap J <= 200 is exceeded. Coefficients are
// omega0-invariant, so the search runs at omega0 = 1.
[[nodiscard]] std::optional<int> min_terms_periodic(double lengthscale);

}  // namespace hsgp
