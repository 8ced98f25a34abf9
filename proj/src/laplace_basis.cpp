#include "hsgp/laplace_basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hsgp {

namespace {
constexpr double kPi = std::numbers::pi;
}

void DomainConfig::validate() const {
  const std::size_t D = half_ranges.size();
  if (D == 0) throw std::invalid_argument("DomainConfig: empty half_ranges");
  if (boundary_factors.size() != D || centers.size() != D) {
    throw std::invalid_argument("DomainConfig: field lengths disagree");
  }
  for (std::size_t d = 0; d < D; ++d) {
    if (!(half_ranges[d] > 0.0)) throw std::invalid_argument("DomainConfig: S_d must be > 0");
    if (!(boundary_factors[d] >= 1.0)) {
      throw std::invalid_argument("DomainConfig: c_d must be >= 1");
    }
  }
}

DomainConfig DomainConfig::from_data(const Eigen::MatrixXd& X,
                                     const std::vector<double>& boundary_factors) {
  const int D = static_cast<int>(X.cols());
  if (X.rows() < 1) throw std::invalid_argument("DomainConfig::from_data: empty X");
  if (static_cast<int>(boundary_factors.size()) != D) {
    throw std::invalid_argument("DomainConfig::from_data: boundary_factors length mismatch");
  }
  DomainConfig domain;
  domain.boundary_factors = boundary_factors;
  domain.half_ranges.resize(static_cast<std::size_t>(D));
  domain.centers.resize(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    const double lo = X.col(d).minCoeff();
    const double hi = X.col(d).maxCoeff();
    const double center = 0.5 * (lo + hi);
    domain.centers[static_cast<std::size_t>(d)] = center;
    domain.half_ranges[static_cast<std::size_t>(d)] =
        std::max(hi - center, center - lo);
  }
  domain.validate();
  return domain;
}

DomainConfig make_domain_1d(double S, double c, double center) {
  DomainConfig domain{{S}, {c}, {center}};
  domain.validate();
  return domain;
}

double eigenvalue(int j, double L) {
  if (j < 1) throw std::invalid_argument("eigenvalue: j must be >= 1");
  if (!(L > 0.0)) throw std::invalid_argument("eigenvalue: L must be > 0");
  const double root = j * kPi / (2.0 * L);
  return root * root;
}

double eigenfunction(int j, double L, double x) {
  if (j < 1) throw std::invalid_argument("eigenfunction: j must be >= 1");
  if (!(L > 0.0)) throw std::invalid_argument("eigenfunction: L must be > 0");
  const double root = j * kPi / (2.0 * L);
  return std::sqrt(1.0 / L) * std::sin(root * (x + L));
}

BasisConfig build_tuples(const std::vector<int>& counts, long cap) {
  if (counts.empty()) throw std::invalid_argument("build_tuples: empty counts");
  long total = 1;
  for (int m : counts) {
    if (m < 1) throw std::invalid_argument("build_tuples: every m_d must be >= 1");
    total *= m;
    if (total > cap) {
      throw std::length_error("build_tuples: prod(m_d) = " + std::to_string(total) +
                              " exceeds cap " + std::to_string(cap));
    }
  }
  const int D = static_cast<int>(counts.size());
  BasisConfig basis;
  basis.counts = counts;
  basis.tuples.resize(total, D);
  // Last dimension varies fastest (row-major lexicographic enumeration).
  std::vector<int> current(static_cast<std::size_t>(D), 1);
  for (long row = 0; row < total; ++row) {
    for (int d = 0; d < D; ++d) basis.tuples(row, d) = current[static_cast<std::size_t>(d)];
    for (int d = D - 1; d >= 0; --d) {
      if (++current[static_cast<std::size_t>(d)] <= counts[static_cast<std::size_t>(d)]) break;
      current[static_cast<std::size_t>(d)] = 1;
    }
  }
  return basis;
}

Eigen::VectorXd multi_eigenvalue(const Eigen::VectorXi& tuple, const Eigen::VectorXd& L) {
  if (tuple.size() != L.size()) {
    throw std::invalid_argument("multi_eigenvalue: dimension mismatch");
  }
  Eigen::VectorXd out(tuple.size());
  for (Eigen::Index d = 0; d < tuple.size(); ++d) out[d] = eigenvalue(tuple[d], L[d]);
  return out;
}

double multi_eigenfunction(const Eigen::VectorXi& tuple, const Eigen::VectorXd& L,
                           const Eigen::VectorXd& x) {
  if (tuple.size() != L.size() || tuple.size() != x.size()) {
    throw std::invalid_argument("multi_eigenfunction: dimension mismatch");
  }
  double prod = 1.0;
  for (Eigen::Index d = 0; d < tuple.size(); ++d) prod *= eigenfunction(tuple[d], L[d], x[d]);
  return prod;
}

DesignResult design_matrix(const Eigen::MatrixXd& X, const DomainConfig& domain,
                           const BasisConfig& basis) {
  domain.validate();
  const int D = domain.dim();
  if (X.cols() != D) throw std::invalid_argument("design_matrix: X columns != domain dimension");
  if (static_cast<int>(basis.counts.size()) != D) {
    throw std::invalid_argument("design_matrix: basis dimension != domain dimension");
  }
  const Eigen::Index n = X.rows();
  const Eigen::Index m = basis.tuples.rows();
  const Eigen::VectorXd L = boundary_lengths(domain);

  DesignResult result;
  result.Phi.resize(n, m);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int d = 0; d < D; ++d) {
      if (std::abs(X(i, d)) > L[d]) result.outside_domain = true;
    }
  }
  // Same evaluation order as multi_eigenfunction so rows match it exactly.
  for (Eigen::Index j = 0; j < m; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      double prod = 1.0;
      for (int d = 0; d < D; ++d) {
        prod *= eigenfunction(basis.tuples(j, d), L[d], X(i, d));
      }
      result.Phi(i, j) = prod;
    }
  }
  return result;
}

Eigen::VectorXd boundary_lengths(const DomainConfig& domain) {
  Eigen::VectorXd L(domain.dim());
  for (int d = 0; d < domain.dim(); ++d) L[d] = domain.L(d);
  return L;
}

}  // namespace hsgp
