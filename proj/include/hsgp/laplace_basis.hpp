#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hsgp {

// Box domain [-L_d, L_d] with L_d = c_d * S_d. Inputs are shifted by
// `centers` (by the model/harness layer) so the data sits symmetrically
// around zero; the basis functions below always see centered coordinates.
struct DomainConfig {
  std::vector<double> half_ranges;      // S_d, input units
  std::vector<double> boundary_factors; // c_d >= 1
  std::vector<double> centers;

  [[nodiscard]] int dim() const { return static_cast<int>(half_ranges.size()); }
  [[nodiscard]] double L(int d) const {
    return boundary_factors[static_cast<std::size_t>(d)] * half_ranges[static_cast<std::size_t>(d)];
  }
  void validate() const;

  // centers = data midpoint per dimension, S_d = max |x - center|.
  [[nodiscard]] static DomainConfig from_data(const Eigen::MatrixXd& X,
                                              const std::vector<double>& boundary_factors);
};

[[nodiscard]] DomainConfig make_domain_1d(double S, double c, double center = 0.0);

// Tensor-product index set. tuples is the m* x D matrix of 1-based indices in
// row-major lexicographic order with the LAST dimension varying fastest;
// this ordering is part of the weight-vector serialization contract.
struct BasisConfig {
  std::vector<int> counts;  // m_d per dimension
  Eigen::MatrixXi tuples;   // m* x D

  [[nodiscard]] int total() const { return static_cast<int>(tuples.rows()); }
};

// Dirichlet Laplacian on [-L, L]: lambda_j = (j pi / (2L))^2.
[[nodiscard]] double eigenvalue(int j, double L);

// phi_j(x) = sqrt(1/L) sin(sqrt(lambda_j) (x + L)); vanishes at x = +-L.
// x outside [-L, L] is permitted (extrapolation); validity is the caller's
// concern.
[[nodiscard]] double eigenfunction(int j, double L, double x);

// Enumerates all D-tuples; throws std::length_error naming prod(m_d) when the
// cap is exceeded.
[[nodiscard]] BasisConfig build_tuples(const std::vector<int>& counts, long cap = 100000);

// Componentwise (pi tuple_d / (2 L_d))^2.
[[nodiscard]] Eigen::VectorXd multi_eigenvalue(const Eigen::VectorXi& tuple,
                                               const Eigen::VectorXd& L);

// Product over dimensions of eigenfunction(tuple_d, L_d, x_d).
[[nodiscard]] double multi_eigenfunction(const Eigen::VectorXi& tuple, const Eigen::VectorXd& L,
                                         const Eigen::VectorXd& x);

struct DesignResult {
  Eigen::MatrixXd Phi;          // n x m*, column order follows tuple rows
  bool outside_domain = false;  // some |x_id| > L_d: approximation invalid there
};

// Phi_ij = multi_eigenfunction(tuples.row(j), L, X.row(i)). X must already be
// centered per DomainConfig.centers.
[[nodiscard]] DesignResult design_matrix(const Eigen::MatrixXd& X, const DomainConfig& domain,
                                         const BasisConfig& basis);

// Convenience: boundary lengths as a vector.
[[nodiscard]] Eigen::VectorXd boundary_lengths(const DomainConfig& domain);

}  // namespace hsgp
