#include "hsgp/kernels.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hsgp {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSqrt3 = std::numbers::sqrt3;

void check_dim(const KernelSpec& spec, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != spec.dim()) {
    throw std::invalid_argument(std::string(what) + ": dimension " +
                                std::to_string(v.size()) + " does not match kernel dimension " +
                                std::to_string(spec.dim()));
  }
}

// Scaled squared distance sum_d ((x_d - x2_d) / ell_d)^2.
double scaled_sq_dist(const KernelSpec& spec, const Eigen::VectorXd& x,
                      const Eigen::VectorXd& x2) {
  double r2 = 0.0;
  for (int d = 0; d < spec.dim(); ++d) {
    const double t = (x[d] - x2[d]) / spec.lengthscales[static_cast<std::size_t>(d)];
    r2 += t * t;
  }
  return r2;
}

}  // namespace

void KernelSpec::validate() const {
  if (!(alpha > 0.0)) throw std::invalid_argument("KernelSpec: alpha must be > 0");
  if (lengthscales.empty()) throw std::invalid_argument("KernelSpec: lengthscales empty");
  for (double ell : lengthscales) {
    if (!(ell > 0.0)) throw std::invalid_argument("KernelSpec: lengthscales must be > 0");
  }
  if (family == KernelFamily::PeriodicSE) {
    if (!omega0 || !(*omega0 > 0.0)) {
      throw std::invalid_argument("KernelSpec: PeriodicSE requires omega0 > 0");
    }
    if (lengthscales.size() != 1) {
      throw std::invalid_argument("KernelSpec: PeriodicSE supports D = 1 only");
    }
  }
}

KernelSpec make_se(double alpha, std::vector<double> lengthscales) {
  KernelSpec spec{KernelFamily::SquaredExponential, alpha, std::move(lengthscales), std::nullopt};
  spec.validate();
  return spec;
}

KernelSpec make_matern32(double alpha, std::vector<double> lengthscales) {
  KernelSpec spec{KernelFamily::Matern32, alpha, std::move(lengthscales), std::nullopt};
  spec.validate();
  return spec;
}

KernelSpec make_periodic_se(double alpha, double lengthscale, double omega0) {
  KernelSpec spec{KernelFamily::PeriodicSE, alpha, {lengthscale}, omega0};
  spec.validate();
  return spec;
}

double covariance(const KernelSpec& spec, const Eigen::VectorXd& x, const Eigen::VectorXd& x2) {
  spec.validate();
  check_dim(spec, x, "covariance x");
  check_dim(spec, x2, "covariance x2");
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return spec.alpha * std::exp(-0.5 * scaled_sq_dist(spec, x, x2));
    case KernelFamily::Matern32: {
      const double r = std::sqrt(3.0 * scaled_sq_dist(spec, x, x2));
      return spec.alpha * (1.0 + r) * std::exp(-r);
    }
    case KernelFamily::PeriodicSE: {
      const double tau = x[0] - x2[0];
      const double s = std::sin(0.5 * *spec.omega0 * tau);
      const double ell = spec.lengthscales[0];
      return spec.alpha * std::exp(-2.0 * s * s / (ell * ell));
    }
  }
  throw std::invalid_argument("covariance: unknown kernel family");
}

double spectral_density(const KernelSpec& spec, double omega) {
  Eigen::VectorXd s(1);
  s[0] = omega;
  if (spec.dim() != 1) {
    throw std::invalid_argument("spectral_density: scalar frequency requires D = 1");
  }
  return spectral_density_multi(spec, s);
}

double spectral_density_multi(const KernelSpec& spec, const Eigen::VectorXd& s) {
  spec.validate();
  check_dim(spec, s, "spectral_density frequency");
  const int D = spec.dim();
  double prod_ell = 1.0;
  double q = 0.0;  // sum_d ell_d^2 s_d^2
  for (int d = 0; d < D; ++d) {
    const double ell = spec.lengthscales[static_cast<std::size_t>(d)];
    prod_ell *= ell;
    q += ell * ell * s[d] * s[d];
  }
  switch (spec.family) {
    case KernelFamily::SquaredExponential:
      return spec.alpha * std::pow(2.0 * kPi, 0.5 * D) * prod_ell * std::exp(-0.5 * q);
    case KernelFamily::Matern32: {
      // C_D = 2^(D+1) pi^((D-1)/2) Gamma((D+3)/2) 3^(3/2); exponent -(D+3)/2
      // (decaying form; the positive-exponent reading diverges).
      const double cd = std::pow(2.0, D + 1) * std::pow(kPi, 0.5 * (D - 1)) *
                        std::tgamma(0.5 * (D + 3)) * kSqrt3 * kSqrt3 * kSqrt3;
      return spec.alpha * cd * prod_ell * std::pow(3.0 + q, -0.5 * (D + 3));
    }
    case KernelFamily::PeriodicSE:
      throw std::invalid_argument(
          "spectral_density: PeriodicSE has a line spectrum; use the periodic expansion");
  }
  throw std::invalid_argument("spectral_density: unknown kernel family");
}

Eigen::MatrixXd gram_matrix(const KernelSpec& spec, const Eigen::MatrixXd& X) {
  spec.validate();
  const Eigen::Index n = X.rows();
  if (n < 1) throw std::invalid_argument("gram_matrix: need n >= 1 rows");
  if (X.cols() != spec.dim()) {
    throw std::invalid_argument("gram_matrix: X columns must match kernel dimension");
  }
  Eigen::MatrixXd K(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    K(i, i) = spec.alpha;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = covariance(spec, X.row(i).transpose(), X.row(j).transpose());
      K(i, j) = v;
      K(j, i) = v;
    }
  }
  return K;
}

}  // namespace hsgp
