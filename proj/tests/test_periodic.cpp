#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "doctest.h"

#include "hsgp/kernels.hpp"
#include "hsgp/periodic.hpp"
#include "hsgp/rng.hpp"
#include "hsgp/serialization.hpp"

using namespace hsgp;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("modified Bessel series values") {
  CHECK(bessel_i(0, 1.0) == doctest::Approx(1.2660658777520084).epsilon(1e-14));
  CHECK(bessel_i(1, 1.0) == doctest::Approx(0.565159103992485).epsilon(1e-13));
  // Leading term of the series: I_0 tends to 1 at small argument.
  CHECK(bessel_i(0, 1e-10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(bessel_i(0, 700.5), std::range_error);
  CHECK_THROWS_AS(bessel_i(-1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bessel_i(0, 0.0), std::invalid_argument);
  CHECK(bessel_i(0, 700.0) > 0.0);
}

TEST_CASE("Bessel recurrence holds across orders and arguments") {
  for (const double z : {0.5, 1.0, 4.0}) {
    for (int j = 1; j <= 10; ++j) {
      const double lhs = bessel_i(j - 1, z) - bessel_i(j + 1, z);
      const double rhs = 2.0 * j / z * bessel_i(j, z);
      CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-10);
    }
  }
}

TEST_CASE("cosine series coefficients from the Bessel form") {
  const PeriodicBasis basis = periodic_coefficients(1.0, 20);
  CHECK(basis.J == 20);
  CHECK(basis.scheme == "bessel");
  CHECK(basis.coeffs.size() == 21);
  // qsq_0 = I_0(1)/e, qsq_1 = 2 I_1(1)/e.
  CHECK(basis.coeffs[0] == doctest::Approx(0.4657596075936404).epsilon(1e-14));
  CHECK(basis.coeffs[1] == doctest::Approx(0.41582083069941694).epsilon(1e-13));
  for (int j = 0; j <= 20; ++j) CHECK(basis.coeffs[j] > 0.0);
  // Total variance identity: e^z = I_0(z) + 2 sum_j I_j(z).
  const double total = basis.coeffs.sum();
  CHECK(total <= 1.0);
  CHECK(total >= 1.0 - 1e-6);
  CHECK_THROWS_AS(periodic_coefficients(0.0, 20), std::invalid_argument);
  CHECK_THROWS_AS(periodic_coefficients(1.0, 0), std::invalid_argument);
}

TEST_CASE("truncated Taylor coefficients converge to the Bessel form") {
  const PeriodicBasis bessel = periodic_coefficients(1.0, 40);
  const PeriodicBasis taylor = periodic_coefficients_truncated(1.0, 40);
  CHECK(taylor.scheme == "truncated");
  for (int j = 0; j <= 40; ++j) {
    CHECK(std::abs(taylor.coeffs[j] - bessel.coeffs[j]) < 1e-8);
  }
  // Single-term inner sum stays finite and positive.
  const PeriodicBasis tiny = periodic_coefficients_truncated(1.0, 1);
  CHECK(std::isfinite(tiny.coeffs[0]));
  CHECK(tiny.coeffs[0] > 0.0);

  // Error against the limit I_0(1)/e shrinks as the order grows.
  const double limit = bessel_i(0, 1.0) / std::exp(1.0);
  double prev = std::abs(periodic_coefficients_truncated(1.0, 2).coeffs[0] - limit);
  for (int J = 3; J <= 40; ++J) {
    const double err = std::abs(periodic_coefficients_truncated(1.0, J).coeffs[0] - limit);
    CHECK(err <= prev + 1e-15);
    prev = err;
  }
  CHECK(prev < 1e-9);
}

TEST_CASE("cosine series is even periodic and matches the kernel") {
  const PeriodicBasis basis = periodic_coefficients(1.0, 20, 1.0);
  CHECK(periodic_approx_cov(basis, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
  const double period = 2.0 * kPi;
  CHECK(periodic_approx_cov(basis, 1.0, period) == periodic_approx_cov(basis, 1.0, 0.0));

  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const double tau = rng.uniform(-5.0, 5.0);
    CHECK(std::abs(periodic_approx_cov(basis, 1.3, tau) -
                   periodic_approx_cov(basis, 1.3, -tau)) < 1e-12);
    CHECK(std::abs(periodic_approx_cov(basis, 1.3, tau + period) -
                   periodic_approx_cov(basis, 1.3, tau)) < 1e-11);
  }

  // Series limit against the exact periodic kernel over one period.
  const KernelSpec exact = make_periodic_se(1.0, 1.0, 1.0);
  Eigen::VectorXd x1(1), x2(1);
  x2[0] = 0.0;
  double worst = 0.0;
  for (int t = 0; t <= 200; ++t) {
    const double tau = period * t / 200.0;
    x1[0] = tau;
    worst = std::max(worst, std::abs(periodic_approx_cov(basis, 1.0, tau) -
                                     covariance(exact, x1, x2)));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("periodic design matrix columns and implied covariance") {
  const PeriodicBasis basis = periodic_coefficients(0.8, 6, 2.0);
  const int J = basis.J;
  Eigen::VectorXd x(4);
  x << 0.0, 0.3, -1.1, 2.4;
  const Eigen::MatrixXd Phi = periodic_design_matrix(x, basis);
  CHECK(Phi.rows() == 4);
  CHECK(Phi.cols() == 2 * J + 1);
  // Row at x = 0: cosine block carries sqrt(qsq_j), sine block vanishes.
  for (int j = 0; j <= J; ++j) {
    CHECK(Phi(0, j) == doctest::Approx(std::sqrt(basis.coeffs[j])).epsilon(1e-15));
  }
  for (int j = 1; j <= J; ++j) CHECK(Phi(0, J + j) == 0.0);

  // Phi Phi^T reproduces the cosine series through the angle difference.
  const Eigen::MatrixXd G = Phi * Phi.transpose();
  for (int i = 0; i < 4; ++i) {
    for (int k = 0; k < 4; ++k) {
      CHECK(std::abs(G(i, k) - periodic_approx_cov(basis, 1.0, x[i] - x[k])) < 1e-12);
    }
  }
}

TEST_CASE("random weights through the periodic features match the series") {
  const PeriodicBasis basis = periodic_coefficients(1.0, 8, 1.0);
  Eigen::VectorXd x(10);
  for (int i = 0; i < 10; ++i) x[i] = -3.0 + 0.6 * i;
  const Eigen::MatrixXd Phi = periodic_design_matrix(x, basis);
  const int cols = static_cast<int>(Phi.cols());

  Rng rng(33);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(10, 10);
  Eigen::VectorXd w(cols);
  for (int t = 0; t < 20000; ++t) {
    for (int j = 0; j < cols; ++j) w[j] = rng.normal();
    const Eigen::VectorXd f = Phi * w;
    sum.selfadjointView<Eigen::Lower>().rankUpdate(f);
  }
  const Eigen::MatrixXd emp = Eigen::MatrixXd(sum.selfadjointView<Eigen::Lower>()) / 20000.0;
  Eigen::MatrixXd target(10, 10);
  for (int i = 0; i < 10; ++i) {
    for (int k = 0; k < 10; ++k) {
      target(i, k) = periodic_approx_cov(basis, 1.0, x[i] - x[k]);
    }
  }
  CHECK((emp - target).norm() / target.norm() < 0.05);
}

TEST_CASE("minimum cosine order tracks the lengthscale") {
  const auto j_half = min_terms_periodic(0.5);
  const auto j_one = min_terms_periodic(1.0);
  const auto j_two = min_terms_periodic(2.0);
  const auto j_ten = min_terms_periodic(10.0);
  REQUIRE(j_half.has_value());
  REQUIRE(j_one.has_value());
  REQUIRE(j_two.has_value());
  REQUIRE(j_ten.has_value());
  CHECK(*j_half >= *j_one);
  CHECK(*j_one >= *j_two);
  CHECK(*j_ten <= 3);

  // Tail mass beyond the returned order is small.
  for (const double ell : {0.5, 1.0, 2.0}) {
    const int J = *min_terms_periodic(ell);
    const PeriodicBasis extended = periodic_coefficients(ell, J + 1);
    CHECK(extended.coeffs[J + 1] / extended.coeffs.head(J + 1).sum() < 0.01);
  }
}

TEST_CASE("periodic basis JSON round trip") {
  const PeriodicBasis basis = periodic_coefficients(0.7, 5, 1.5);
  const json j = to_json(basis);
  CHECK(j.at("J").get<int>() == 5);
  CHECK(j.at("omega0").get<double>() == 1.5);
  CHECK(j.at("scheme").get<std::string>() == "bessel");
  const PeriodicBasis back = periodic_from_json(j);
  CHECK(back.J == basis.J);
  CHECK(back.omega0 == basis.omega0);
  CHECK(back.scheme == basis.scheme);
  CHECK(back.coeffs == basis.coeffs);
  json bad = j;
  bad["coeffs"] = std::vector<double>{1.0, 2.0};
  CHECK_THROWS_AS(periodic_from_json(bad), std::invalid_argument);
}
