#include "hsgp/periodic.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hsgp/kernels.hpp"

namespace hsgp {

namespace {

constexpr double kPi = std::numbers::pi;

void check_lengthscale(double ell) {
  if (!(ell > 0.0)) throw std::invalid_argument("periodic: lengthscale must be > 0");
}

// Trapezoid rule over one period, 2001 points, matching the covariance TV
// diagnostic's quadrature convention.
double tv_error_one_period(const PeriodicBasis& basis, double ell) {
  constexpr int kPoints = 2001;
  const double period = 2.0 * kPi / basis.omega0;
  const double h = period / (kPoints - 1);
  const KernelSpec exact = make_periodic_se(1.0, ell, basis.omega0);
  Eigen::VectorXd x1(1), x2(1);
  x2[0] = 0.0;
  double num = 0.0;
  double den = 0.0;
  for (int t = 0; t < kPoints; ++t) {
    const double tau = t * h;
    x1[0] = tau;
    const double k = covariance(exact, x1, x2);
    const double diff = std::abs(k - periodic_approx_cov(basis, 1.0, tau));
    const double w = (t == 0 || t == kPoints - 1) ? 0.5 : 1.0;
    num += w * diff;
    den += w * k;
  }
  return num / den;
}

}  // namespace

double bessel_i(int order, double z) {
  if (order < 0) throw std::invalid_argument("bessel_i: order must be >= 0");
  if (!(z > 0.0)) throw std::invalid_argument("bessel_i: z must be > 0");
  if (z > 700.0) {
    throw std::range_error("bessel_i: z = " + std::to_string(z) + " exceeds overflow guard 700");
  }
  // term_k = (z/2)^(2k + order) / (k! (k + order)!), accumulated until the
  // running term drops below 1e-16 of the running sum.
  const double half = 0.5 * z;
  double term = 1.0;
  for (int k = 1; k <= order; ++k) term *= half / k;  // (z/2)^order / order!
  double sum = term;
  for (int k = 1; k < 10000; ++k) {
    term *= half * half / (static_cast<double>(k) * (k + order));
    sum += term;
    if (term < 1e-16 * sum) break;
  }
  return sum;
}

PeriodicBasis periodic_coefficients(double lengthscale, int J, double omega0) {
  check_lengthscale(lengthscale);
  if (J < 1) throw std::invalid_argument("periodic_coefficients: J must be >= 1");
  if (!(omega0 > 0.0)) throw std::invalid_argument("periodic_coefficients: omega0 must be > 0");
  const double z = 1.0 / (lengthscale * lengthscale);
  const double ez = std::exp(z);  // guarded by bessel_i's z <= 700 below
  PeriodicBasis basis;
  basis.J = J;
  basis.omega0 = omega0;
  basis.scheme = "bessel";
  basis.coeffs.resize(J + 1);
  basis.coeffs[0] = bessel_i(0, z) / ez;
  for (int j = 1; j <= J; ++j) basis.coeffs[j] = 2.0 * bessel_i(j, z) / ez;
  return basis;
}

PeriodicBasis periodic_coefficients_truncated(double lengthscale, int J, double omega0) {
  check_lengthscale(lengthscale);
  if (J < 1) throw std::invalid_argument("periodic_coefficients_truncated: J must be >= 1");
  if (!(omega0 > 0.0)) {
    throw std::invalid_argument("periodic_coefficients_truncated: omega0 must be > 0");
  }
  const double z = 1.0 / (lengthscale * lengthscale);
  if (z > 700.0) {
    throw std::range_error("periodic_coefficients_truncated: 1/ell^2 exceeds overflow guard");
  }
  const double inv2ell2 = 0.5 * z;  // (2 ell^2)^-1
  const double ez = std::exp(z);
  PeriodicBasis basis;
  basis.J = J;
  basis.omega0 = omega0;
  basis.scheme = "truncated";
  basis.coeffs.resize(J + 1);
  for (int j = 0; j <= J; ++j) {
    // sum_{i=0}^{floor((J-j)/2)} (2 ell^2)^(-j-2i) / ((j+i)! i!)
    double sum = 0.0;
    double term = std::pow(inv2ell2, j) / std::tgamma(j + 1.0);  // i = 0
    sum = term;
    const int imax = (J - j) / 2;
    for (int i = 1; i <= imax; ++i) {
      term *= inv2ell2 * inv2ell2 / (static_cast<double>(i) * (j + i));
      sum += term;
    }
    const double scale = (j == 0 ? 1.0 : 2.0) / ez;
    basis.coeffs[j] = scale * sum;
  }
  return basis;
}

double periodic_approx_cov(const PeriodicBasis& basis, double alpha, double tau) {
  if (!(alpha > 0.0)) throw std::invalid_argument("periodic_approx_cov: alpha must be > 0");
  double sum = 0.0;
  for (int j = 0; j <= basis.J; ++j) sum += basis.coeffs[j] * std::cos(j * basis.omega0 * tau);
  return alpha * sum;
}

Eigen::MatrixXd periodic_design_matrix(const Eigen::VectorXd& x, const PeriodicBasis& basis) {
  const Eigen::Index n = x.size();
  const int J = basis.J;
  Eigen::MatrixXd Phi(n, 2 * J + 1);
  Eigen::VectorXd root = basis.coeffs.array().sqrt();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int j = 0; j <= J; ++j) Phi(i, j) = root[j] * std::cos(j * basis.omega0 * x[i]);
    for (int j = 1; j <= J; ++j) Phi(i, J + j) = root[j] * std::sin(j * basis.omega0 * x[i]);
  }
  return Phi;
}

std::optional<int> min_terms_periodic(double lengthscale) {
  check_lengthscale(lengthscale);
  constexpr int kCap = 200;
  constexpr double kThreshold = 0.005;
  for (int J = 1; J <= kCap; ++J) {
    const PeriodicBasis basis = periodic_coefficients(lengthscale, J, 1.0);
    if (tv_error_one_period(basis, lengthscale) < kThreshold) return J;
  }
  return std::nullopt;
}

}  // namespace hsgp
