#include "hsgp/hsgp_model.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hsgp {

namespace {
constexpr double kPi = std::numbers::pi;
}

Eigen::MatrixXd sqrt_eigenvalues(const DomainConfig& domain, const BasisConfig& basis) {
  domain.validate();
  const int D = domain.dim();
  if (static_cast<int>(basis.counts.size()) != D) {
    throw std::invalid_argument("sqrt_eigenvalues: basis dimension != domain dimension");
  }
  const Eigen::Index m = basis.tuples.rows();
  Eigen::MatrixXd roots(m, D);
  for (Eigen::Index j = 0; j < m; ++j) {
    for (int d = 0; d < D; ++d) {
      roots(j, d) = basis.tuples(j, d) * kPi / (2.0 * domain.L(d));
    }
  }
  return roots;
}

SpectralDiag spectral_diag(const KernelSpec& spec, const DomainConfig& domain,
                           const BasisConfig& basis) {
  return spectral_diag(spec, sqrt_eigenvalues(domain, basis));
}

SpectralDiag spectral_diag(const KernelSpec& spec, const Eigen::MatrixXd& sqrt_eigs) {
  spec.validate();
  if (spec.family == KernelFamily::PeriodicSE) {
    throw std::invalid_argument("spectral_diag: PeriodicSE unsupported; use periodic expansion");
  }
  if (sqrt_eigs.cols() != spec.dim()) {
    throw std::invalid_argument("spectral_diag: kernel dimension != basis dimension");
  }
  SpectralDiag diag;
  diag.values.resize(sqrt_eigs.rows());
  for (Eigen::Index j = 0; j < sqrt_eigs.rows(); ++j) {
    diag.values[j] = spectral_density_multi(spec, sqrt_eigs.row(j).transpose());
  }
  return diag;
}

double approx_covariance(const KernelSpec& spec, const DomainConfig& domain,
                         const BasisConfig& basis, const Eigen::VectorXd& x,
                         const Eigen::VectorXd& x2) {
  const SpectralDiag diag = spectral_diag(spec, domain, basis);
  const Eigen::VectorXd L = boundary_lengths(domain);
  double sum = 0.0;
  for (Eigen::Index j = 0; j < basis.tuples.rows(); ++j) {
    sum += diag.values[j] * multi_eigenfunction(basis.tuples.row(j).transpose(), L, x) *
           multi_eigenfunction(basis.tuples.row(j).transpose(), L, x2);
  }
  return sum;
}

Eigen::MatrixXd approx_gram(const KernelSpec& spec, const DomainConfig& domain,
                            const BasisConfig& basis, const Eigen::MatrixXd& X) {
  const SpectralDiag diag = spectral_diag(spec, domain, basis);
  const Eigen::MatrixXd Phi = design_matrix(X, domain, basis).Phi;
  return Phi * diag.values.asDiagonal() * Phi.transpose();
}

Eigen::VectorXd evaluate_function(const Eigen::VectorXd& weights, const KernelSpec& spec,
                                  const DomainConfig& domain, const BasisConfig& basis,
                                  const Eigen::MatrixXd& X) {
  if (weights.size() != basis.tuples.rows()) {
    throw std::invalid_argument("evaluate_function: weight length != m*");
  }
  const SpectralDiag diag = spectral_diag(spec, domain, basis);
  const Eigen::MatrixXd Phi = design_matrix(X, domain, basis).Phi;
  return Phi * (diag.values.array().sqrt() * weights.array()).matrix();
}

bool in_domain(const DomainConfig& domain, const Eigen::VectorXd& x) {
  if (x.size() != domain.dim()) throw std::invalid_argument("in_domain: dimension mismatch");
  for (int d = 0; d < domain.dim(); ++d) {
    if (std::abs(x[d]) > domain.L(d)) return false;
  }
  return true;
}

}  // namespace hsgp
