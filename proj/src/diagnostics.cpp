#include "hsgp/diagnostics.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "hsgp/laplace_basis.hpp"
#include "hsgp/parallel.hpp"

namespace hsgp {

namespace {

// Shared quadrature state for one (family, ell, S, c) cell. Terms are added
// one basis function at a time in ascending j, so evaluating at m after
// m-1 gives bit-identical sums to a fresh evaluation at m: the tabulated
// invariant tv(min_m) < 0.01 <= tv(min_m - 1) is exact, not approximate.
class TvAccumulator {
 public:
  TvAccumulator(KernelFamily family, double ell, double S, double c)
      : family_(family), ell_(ell), S_(S), L_(c * S) {
    if (!(ell > 0.0) || !(S > 0.0)) {
      throw std::invalid_argument("covariance_tv_error: lengthscale and S must be > 0");
    }
    if (!(c >= 1.0)) throw std::invalid_argument("covariance_tv_error: c must be >= 1");
    const KernelSpec spec = family == KernelFamily::SquaredExponential
                                ? make_se(1.0, {ell})
                                : make_matern32(1.0, {ell});
    if (family == KernelFamily::PeriodicSE) {
      throw std::invalid_argument("covariance_tv_error: PeriodicSE uses min_terms_periodic");
    }
    const double h = S_ / (kTvQuadraturePoints - 1);
    tau_.resize(kTvQuadraturePoints);
    exact_.resize(kTvQuadraturePoints);
    approx_.assign(kTvQuadraturePoints, 0.0);
    Eigen::VectorXd x1(1), x2(1);
    x2[0] = 0.0;
    denominator_ = 0.0;
    for (int t = 0; t < kTvQuadraturePoints; ++t) {
      tau_[t] = t * h;
      x1[0] = tau_[t];
      exact_[t] = covariance(spec, x1, x2);
      denominator_ += weight(t) * exact_[t];
    }
    spec_ = spec;
  }

  // Adds basis function j = m_done_ + 1.
  void add_term() {
    const int j = ++m_done_;
    const double root = std::sqrt(eigenvalue(j, L_));
    const double sj = spectral_density(spec_, root);
    const double phi0 = eigenfunction(j, L_, 0.0);
    for (int t = 0; t < kTvQuadraturePoints; ++t) {
      approx_[t] += sj * eigenfunction(j, L_, tau_[t]) * phi0;
    }
  }

  [[nodiscard]] double error() const {
    double num = 0.0;
    for (int t = 0; t < kTvQuadraturePoints; ++t) {
      num += weight(t) * std::abs(exact_[t] - approx_[t]);
    }
    return num / denominator_;
  }

  [[nodiscard]] int terms() const { return m_done_; }

 private:
  static double weight(int t) {
    return (t == 0 || t == kTvQuadraturePoints - 1) ? 0.5 : 1.0;
  }

  KernelFamily family_;
  KernelSpec spec_;
  double ell_, S_, L_;
  std::vector<double> tau_, exact_, approx_;
  double denominator_ = 0.0;
  int m_done_ = 0;
};

}  // namespace

double covariance_tv_error(KernelFamily family, double lengthscale, double S, double c, int m) {
  if (m < 1) throw std::invalid_argument("covariance_tv_error: m must be >= 1");
  TvAccumulator acc(family, lengthscale, S, c);
  for (int j = 0; j < m; ++j) acc.add_term();
  return acc.error();
}

DiagnosticsReport tv_report(KernelFamily family, double lengthscale_over_S, double c, int m) {
  DiagnosticsReport report;
  report.family = family;
  report.lengthscale_over_S = lengthscale_over_S;
  report.c = c;
  report.m = m;
  report.tv_error_normalized = covariance_tv_error(family, lengthscale_over_S, 1.0, c, m);
  report.threshold = kTvThreshold;
  report.passed = report.tv_error_normalized < report.threshold;
  return report;
}

std::optional<int> min_basis_functions(KernelFamily family, double lengthscale_over_S,
                                       double c) {
  TvAccumulator acc(family, lengthscale_over_S, 1.0, c);
  for (int m = 1; m <= kMaxBasisSearch; ++m) {
    acc.add_term();
    if (acc.error() < kTvThreshold) return m;
  }
  return std::nullopt;
}

std::optional<double> min_lengthscale(KernelFamily family, int m, double c) {
  if (m < 1) throw std::invalid_argument("min_lengthscale: m must be >= 1");
  const auto tv = [&](double ell) {
    return covariance_tv_error(family, ell, 1.0, c, m);
  };
  // 20 scan points per decade over [1e-3, 10].
  constexpr int kScan = 81;
  const double log_lo = std::log10(kMinLengthscaleLo);
  const double log_hi = std::log10(kMinLengthscaleHi);
  double prev = kMinLengthscaleLo;
  double found_lo = -1.0, found_hi = -1.0;
  for (int i = 0; i < kScan; ++i) {
    const double ell = std::pow(10.0, log_lo + (log_hi - log_lo) * i / (kScan - 1));
    if (tv(ell) < kTvThreshold) {
      if (i == 0) return ell;
      found_lo = prev;
      found_hi = ell;
      break;
    }
    prev = ell;
  }
  if (found_hi < 0.0) return std::nullopt;
  while (found_hi - found_lo > 1e-3) {
    const double mid = 0.5 * (found_lo + found_hi);
    if (tv(mid) < kTvThreshold) {
      found_hi = mid;
    } else {
      found_lo = mid;
    }
  }
  return found_hi;
}

FitCheck check_fit(double lengthscale_estimate, double S, int m, double c,
                   KernelFamily family) {
  if (!(lengthscale_estimate > 0.0) || !(S > 0.0)) {
    throw std::invalid_argument("check_fit: lengthscale estimate and S must be > 0");
  }
  FitCheck check;
  const std::optional<double> threshold = min_lengthscale(family, m, c);
  if (!threshold) {
    check.pass = false;
    check.margin = -std::numeric_limits<double>::infinity();
    check.remediation =
        "increase m or decrease c (increasing m is usually the preferred approach)";
    return check;
  }
  check.threshold = *threshold;
  check.margin = lengthscale_estimate / S - *threshold;
  check.pass = check.margin >= 0.0;  // inclusive at the threshold
  if (!check.pass) {
    check.remediation =
        "increase m or decrease c (increasing m is usually the preferred approach)";
  }
  return check;
}

std::vector<TableRow> build_table(KernelFamily family,
                                  const std::vector<double>& lengthscales_over_S,
                                  const std::vector<double>& cs) {
  const std::size_t rows = lengthscales_over_S.size() * cs.size();
  std::vector<TableRow> table(rows);
  parallel_for(rows, [&](std::size_t idx) {
    const std::size_t i = idx / cs.size();
    const std::size_t j = idx % cs.size();
    TableRow& row = table[idx];
    row.lengthscale_over_S = lengthscales_over_S[i];
    row.c = cs[j];
    const auto m = min_basis_functions(family, row.lengthscale_over_S, row.c);
    row.min_m = m ? *m : -1;
  });
  return table;
}

void write_table_csv(const std::string& path, KernelFamily family,
                     const std::vector<TableRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_table_csv: cannot open " + path);
  out << "family,lengthscale_over_S,c,min_m\n";
  for (const TableRow& row : rows) {
    out << family_name(family) << ',' << row.lengthscale_over_S << ',' << row.c << ','
        << row.min_m << "\n";
  }
}

std::string family_name(KernelFamily family) {
  switch (family) {
    case KernelFamily::SquaredExponential: return "SquaredExponential";
    case KernelFamily::Matern32: return "Matern32";
    case KernelFamily::PeriodicSE: return "PeriodicSE";
  }
  throw std::invalid_argument("family_name: unknown family");
}

KernelFamily family_from_name(const std::string& name) {
  if (name == "SquaredExponential") return KernelFamily::SquaredExponential;
  if (name == "Matern32") return KernelFamily::Matern32;
  if (name == "PeriodicSE") return KernelFamily::PeriodicSE;
  throw std::invalid_argument("unknown kernel family: " + name);
}

}  // namespace hsgp
