#pragma once

#include <Eigen/Dense>

#include "hsgp/kernels.hpp"
#include "hsgp/laplace_basis.hpp"

namespace hsgp {

// Diagonal Delta of the low-rank expansion: entry j is the anisotropic
// spectral density at the componentwise square root of the j-th multivariate
// eigenvalue. Stored as a vector, never a dense matrix (cost contract O(nm)).
struct SpectralDiag {
  Eigen::VectorXd values;
};

// m* x D matrix of componentwise sqrt(lambda*_j); depends on (domain, basis)
// only, never on kernel hyperparameters.
[[nodiscard]] Eigen::MatrixXd sqrt_eigenvalues(const DomainConfig& domain,
                                               const BasisConfig& basis);

[[nodiscard]] SpectralDiag spectral_diag(const KernelSpec& spec, const DomainConfig& domain,
                                         const BasisConfig& basis);

// Hot-path overload over a precomputed sqrt_eigenvalues matrix.
[[nodiscard]] SpectralDiag spectral_diag(const KernelSpec& spec,
                                         const Eigen::MatrixXd& sqrt_eigs);

// Truncated covariance sum_j Delta_j phi_j(x) phi_j(x2). x, x2 are centered
// coordinates; callers may probe outside the box (value decays to the
// Dirichlet zero at the boundary).
[[nodiscard]] double approx_covariance(const KernelSpec& spec, const DomainConfig& domain,
                                       const BasisConfig& basis, const Eigen::VectorXd& x,
                                       const Eigen::VectorXd& x2);

// Phi Delta Phi^T; PSD with rank <= m*.
[[nodiscard]] Eigen::MatrixXd approx_gram(const KernelSpec& spec, const DomainConfig& domain,
                                          const BasisConfig& basis, const Eigen::MatrixXd& X);

// Linearized GP draw: f(x_i) = sum_j sqrt(Delta_j) phi_j(x_i) beta_j, with
// standard-normal weights beta (non-centered parameterization).
[[nodiscard]] Eigen::VectorXd evaluate_function(const Eigen::VectorXd& weights,
                                                const KernelSpec& spec,
                                                const DomainConfig& domain,
                                                const BasisConfig& basis,
                                                const Eigen::MatrixXd& X);

// True when every coordinate of x lies inside [-L_d, L_d].
[[nodiscard]] bool in_domain(const DomainConfig& domain, const Eigen::VectorXd& x);

}  // namespace hsgp
