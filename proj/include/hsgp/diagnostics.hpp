#pragma once

#include <optional>
#include <string>
#include <vector>

#include "hsgp/kernels.hpp"

namespace hsgp {

// Quadrature convention for the accuracy criterion: integrate tau over
// [0, S] with a 2001-point trapezoid rule, eigenbasis box L = c * S.
// Every consumer must use these constants so thresholds stay comparable.
inline constexpr int kTvQuadraturePoints = 2001;
inline constexpr double kTvThreshold = 0.01;
inline constexpr int kMaxBasisSearch = 512;
inline constexpr double kMinLengthscaleLo = 1e-3;
inline constexpr double kMinLengthscaleHi = 10.0;

struct DiagnosticsReport {
  KernelFamily family{};
  double lengthscale_over_S = 0.0;
  double c = 0.0;
  int m = 0;
  double tv_error_normalized = 0.0;
  bool passed = false;          // tv_error_normalized < threshold
  double threshold = kTvThreshold;
};

// Normalized total-variation error between k(tau) and the m-term expansion
// sum_j S(sqrt(lambda_j)) phi_j(tau) phi_j(0): integral of |difference| over
// [0, S] divided by the integral of k. alpha-invariant; computed at alpha=1.
[[nodiscard]] double covariance_tv_error(KernelFamily family, double lengthscale, double S,
                                         double c, int m);

[[nodiscard]] DiagnosticsReport tv_report(KernelFamily family, double lengthscale_over_S,
                                          double c, int m);

// Smallest m in [1, 512] with tv error < 1%; nullopt when no m suffices
// (contour lines end: the boundary factor is too tight for this
// lengthscale regardless of m).
[[nodiscard]] std::optional<int> min_basis_functions(KernelFamily family,
                                                     double lengthscale_over_S, double c);

// Smallest passing ell/S in [1e-3, 10] at tolerance 1e-3. The tv error is
// not monotone in ell (it rises again when the boundary bites at large ell),
// so a log-spaced scan brackets the first passing point before bisection;
// nullopt when no scanned ell passes.
[[nodiscard]] std::optional<double> min_lengthscale(KernelFamily family, int m, double c);

struct FitCheck {
  bool pass = false;
  double margin = 0.0;  // ell_hat/S - threshold; -inf when not achievable
  std::optional<double> threshold;
  std::string remediation;  // empty on pass
};

// pass iff ell_hat / S >= min_lengthscale(family, m, c) (inclusive).
[[nodiscard]] FitCheck check_fit(double lengthscale_estimate, double S, int m, double c,
                                 KernelFamily family);

struct TableRow {
  double lengthscale_over_S = 0.0;
  double c = 0.0;
  int min_m = -1;  // -1 encodes not-achievable
};

// Cross product of the two grids; cells run in a worker pool, merged in
// deterministic row order (ell outer, c inner).
[[nodiscard]] std::vector<TableRow> build_table(KernelFamily family,
                                                const std::vector<double>& lengthscales_over_S,
                                                const std::vector<double>& cs);

// Header "family,lengthscale_over_S,c,min_m"; -1 sentinel rows included.
void write_table_csv(const std::string& path, KernelFamily family,
                     const std::vector<TableRow>& rows);

[[nodiscard]] std::string family_name(KernelFamily family);
[[nodiscard]] KernelFamily family_from_name(const std::string& name);

}  // namespace hsgp
