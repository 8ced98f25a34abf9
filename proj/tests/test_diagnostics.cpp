#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "doctest.h"

#include "hsgp/diagnostics.hpp"

using namespace hsgp;

namespace {
constexpr KernelFamily kSE = KernelFamily::SquaredExponential;
}

TEST_CASE("minimum basis size at the reference operating point") {
  const auto min_m = min_basis_functions(kSE, 0.3, 1.5);
  REQUIRE(min_m.has_value());
  CHECK(*min_m >= 8);
  CHECK(*min_m <= 14);
  // Minimality: the returned m passes and the one below does not.
  CHECK(tv_report(kSE, 0.3, 1.5, *min_m).passed);
  CHECK_FALSE(tv_report(kSE, 0.3, 1.5, *min_m - 1).passed);
}

TEST_CASE("tight boundary factor ends the contour line") {
  CHECK_FALSE(min_basis_functions(kSE, 0.5, 1.05).has_value());
  // At a smaller lengthscale the same boundary factor suffices: the failure
  // above is a boundary effect, not a basis-size effect.
  CHECK(covariance_tv_error(kSE, 0.3, 1.0, 1.05, 200) < kTvThreshold);
}

TEST_CASE("tv report carries the operating point and normalization") {
  const DiagnosticsReport report = tv_report(kSE, 0.3, 2.5, 64);
  CHECK(report.family == kSE);
  CHECK(report.lengthscale_over_S == 0.3);
  CHECK(report.c == 2.5);
  CHECK(report.m == 64);
  CHECK(report.threshold == kTvThreshold);
  CHECK(report.tv_error_normalized >= 0.0);
  CHECK(report.passed == (report.tv_error_normalized < report.threshold));
  CHECK(report.passed);
  // The normalized criterion is scale-free: same answer at S = 1 and S = 3.
  CHECK(covariance_tv_error(kSE, 0.3 * 3.0, 3.0, 2.5, 64) ==
        doctest::Approx(covariance_tv_error(kSE, 0.3, 1.0, 2.5, 64)).epsilon(1e-10));
}

TEST_CASE("minimum lengthscale bands and monotonicity in m") {
  const auto ell8 = min_lengthscale(kSE, 8, 1.5);
  const auto ell32 = min_lengthscale(kSE, 32, 1.5);
  const auto ell4 = min_lengthscale(kSE, 4, 1.5);
  const auto ell512 = min_lengthscale(kSE, 512, 1.5);
  REQUIRE(ell8.has_value());
  REQUIRE(ell32.has_value());
  REQUIRE(ell4.has_value());
  REQUIRE(ell512.has_value());
  CHECK(*ell8 > 0.28);
  CHECK(*ell8 < 0.36);
  CHECK(*ell32 > 0.07);
  CHECK(*ell32 < 0.11);
  CHECK(*ell4 > *ell8);
  CHECK(*ell8 > *ell32);
  CHECK(*ell32 > *ell512);
  CHECK(*ell512 <= 0.05);
  // The returned point passes and a 10% smaller lengthscale does not.
  CHECK(covariance_tv_error(kSE, *ell8, 1.0, 1.5, 8) < kTvThreshold);
  CHECK(covariance_tv_error(kSE, 0.9 * *ell8, 1.0, 1.5, 8) >= kTvThreshold);
}

TEST_CASE("fit check is inclusive at the boundary") {
  const auto threshold = min_lengthscale(kSE, 8, 1.5);
  REQUIRE(threshold.has_value());

  const FitCheck at = check_fit(*threshold, 1.0, 8, 1.5, kSE);
  CHECK(at.pass);
  CHECK(at.margin == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(at.remediation.empty());
  REQUIRE(at.threshold.has_value());
  CHECK(*at.threshold == *threshold);

  const FitCheck below = check_fit(0.99 * *threshold, 1.0, 8, 1.5, kSE);
  CHECK_FALSE(below.pass);
  CHECK(below.margin < 0.0);
  CHECK(below.remediation ==
        "increase m or decrease c (increasing m is usually the preferred approach)");

  const FitCheck above = check_fit(2.0 * *threshold, 1.0, 8, 1.5, kSE);
  CHECK(above.pass);
  CHECK(above.margin > 0.0);

  // Scale invariance: the estimate is compared in units of S. Power-of-two
  // scaling keeps the quotient exact.
  const FitCheck scaled = check_fit(4.0 * *threshold, 2.0, 8, 1.5, kSE);
  CHECK(scaled.pass);
  CHECK(scaled.margin == doctest::Approx(above.margin).epsilon(1e-15));
}

TEST_CASE("fit check reports unreachable operating points") {
  const FitCheck hopeless = check_fit(0.5, 1.0, 1, 4.0, kSE);
  CHECK_FALSE(hopeless.pass);
  CHECK(std::isinf(hopeless.margin));
  CHECK(hopeless.margin < 0.0);
  CHECK_FALSE(hopeless.threshold.has_value());
  CHECK_FALSE(hopeless.remediation.empty());
}

TEST_CASE("diagnostic table rows are ordered and sentinel-coded") {
  const std::vector<double> ells{0.3, 0.6};
  const std::vector<double> cs{1.05, 1.5};
  const auto rows = build_table(kSE, ells, cs);
  REQUIRE(rows.size() == 4);
  // ell outer, c inner.
  CHECK(rows[0].lengthscale_over_S == 0.3);
  CHECK(rows[0].c == 1.05);
  CHECK(rows[1].lengthscale_over_S == 0.3);
  CHECK(rows[1].c == 1.5);
  CHECK(rows[2].lengthscale_over_S == 0.6);
  CHECK(rows[2].c == 1.05);
  CHECK(rows[3].lengthscale_over_S == 0.6);
  CHECK(rows[3].c == 1.5);
  // 0.6/1.05 is past the contour end; the others are achievable.
  CHECK(rows[0].min_m > 0);
  CHECK(rows[1].min_m > 0);
  CHECK(rows[2].min_m == -1);
  CHECK(rows[3].min_m > 0);
  // Cross-check one cell against the scalar search.
  CHECK(rows[1].min_m == *min_basis_functions(kSE, 0.3, 1.5));

  const std::string path = "table_test.csv";
  write_table_csv(path, kSE, rows);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "family,lengthscale_over_S,c,min_m");
  int data_lines = 0;
  bool saw_sentinel = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ++data_lines;
    if (line.find(",-1") != std::string::npos) saw_sentinel = true;
    CHECK(line.rfind("SquaredExponential,", 0) == 0);
  }
  CHECK(data_lines == 4);
  CHECK(saw_sentinel);
  in.close();
  std::remove(path.c_str());
}

TEST_CASE("family names round trip") {
  CHECK(family_name(KernelFamily::SquaredExponential) == "SquaredExponential");
  CHECK(family_name(KernelFamily::Matern32) == "Matern32");
  CHECK(family_name(KernelFamily::PeriodicSE) == "PeriodicSE");
  for (const auto family : {KernelFamily::SquaredExponential, KernelFamily::Matern32,
                            KernelFamily::PeriodicSE}) {
    CHECK(family_from_name(family_name(family)) == family);
  }
  CHECK_THROWS_AS(family_from_name("Cauchy"), std::invalid_argument);
}
