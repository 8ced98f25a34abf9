#include "hsgp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "hsgp/diagnostics.hpp"
#include "hsgp/errors.hpp"
#include "hsgp/hsgp_model.hpp"
#include "hsgp/laplace_basis.hpp"
#include "hsgp/nelder_mead.hpp"
#include "hsgp/parallel.hpp"
#include "hsgp/rng.hpp"
#include "hsgp/serialization.hpp"

namespace hsgp {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

KernelSpec make_spec(KernelFamily family, double alpha, const std::vector<double>& ell) {
  switch (family) {
    case KernelFamily::SquaredExponential:
      return make_se(alpha, ell);
    case KernelFamily::Matern32:
      return make_matern32(alpha, ell);
    case KernelFamily::PeriodicSE:
      throw std::invalid_argument("experiments: periodic kernel unsupported here");
  }
  throw std::invalid_argument("experiments: unknown kernel family");
}

// Half-range of each column; the S_d the diagnostics threshold refers to.
std::vector<double> data_half_ranges(const Eigen::MatrixXd& X) {
  std::vector<double> S(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index d = 0; d < X.cols(); ++d) {
    S[static_cast<std::size_t>(d)] = 0.5 * (X.col(d).maxCoeff() - X.col(d).minCoeff());
  }
  return S;
}

// Dense-model posterior log-density in theta = (log sigma, log alpha,
// log ell_1..D); failed factorizations count as zero posterior mass.
struct DenseLogPosterior {
  const Eigen::MatrixXd& X;
  const Eigen::VectorXd& y;
  KernelFamily family;
  const PriorConfig& priors;

  double operator()(const Eigen::VectorXd& theta) const {
    const double sigma = std::exp(theta[0]);
    const double alpha = std::exp(theta[1]);
    if (!std::isfinite(sigma) || !std::isfinite(alpha) || sigma <= 0.0 || alpha <= 0.0) {
      return kNegInf;
    }
    std::vector<double> ell(static_cast<std::size_t>(theta.size() - 2));
    for (std::size_t d = 0; d < ell.size(); ++d) {
      ell[d] = std::exp(theta[2 + d]);
      if (!std::isfinite(ell[d]) || ell[d] <= 0.0) return kNegInf;
    }
    double lml = 0.0;
    try {
      const GPFit fit = fit_exact(X, y, make_spec(family, alpha, ell), sigma);
      lml = log_marginal_likelihood(fit);
    } catch (const NumericalError&) {
      return kNegInf;
    }
    double lp = lml;
    lp += priors.noise_prior.log_density(sigma) + theta[0];
    lp += priors.alpha_prior.log_density(alpha) + theta[1];
    for (std::size_t d = 0; d < ell.size(); ++d) {
      lp += priors.lengthscale_prior.log_density(ell[d]) + theta[2 + d];
    }
    return std::isfinite(lp) ? lp : kNegInf;
  }
};

Eigen::VectorXd map_theta0(const MapInit& init, const std::vector<double>& S) {
  const int D = static_cast<int>(S.size());
  Eigen::VectorXd theta0(2 + D);
  theta0[0] = std::log(init.sigma);
  theta0[1] = std::log(init.alpha);
  for (int d = 0; d < D; ++d) {
    const double fallback = S[static_cast<std::size_t>(d)] > 0.0
                                ? 0.3 * S[static_cast<std::size_t>(d)]
                                : 0.3;
    const double ell0 =
        init.lengthscales.empty() ? fallback : init.lengthscales[static_cast<std::size_t>(d)];
    theta0[2 + d] = std::log(ell0);
  }
  return theta0;
}

double rms_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size() || a.size() == 0) {
    throw std::invalid_argument("rms_diff: length mismatch");
  }
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

// RMSE against the latent truth, standardized by the truth's population
// standard deviation on the same split.
double srmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& truth) {
  if (truth.size() < 2) throw std::invalid_argument("srmse: split too small");
  const double mu = truth.mean();
  const double sd = std::sqrt((truth.array() - mu).square().mean());
  if (!(sd > 0.0)) throw std::invalid_argument("srmse: degenerate latent spread");
  return rms_diff(pred, truth) / sd;
}

// Order-statistic quantile with linear interpolation.
double quantile(std::vector<double> v, double p) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = h - static_cast<double>(lo);
  return v[lo] + frac * (v[lo + 1] - v[lo]);
}

// Equally spaced univariate grid spanning center +- fraction * half-range of
// the fit inputs; the shared evaluation set for model-vs-model RMSE.
Eigen::MatrixXd interior_grid(const Eigen::MatrixXd& X, int points, double fraction) {
  if (X.cols() != 1) throw std::invalid_argument("interior_grid: univariate only");
  if (points < 2) throw std::invalid_argument("interior_grid: points >= 2 required");
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw std::invalid_argument("interior_grid: fraction in (0, 1] required");
  }
  const double lo = X.col(0).minCoeff();
  const double hi = X.col(0).maxCoeff();
  const double center = 0.5 * (lo + hi);
  const double span = fraction * 0.5 * (hi - lo);
  Eigen::MatrixXd G(points, 1);
  for (int i = 0; i < points; ++i) {
    G(i, 0) = center - span + 2.0 * span * static_cast<double>(i) / (points - 1);
  }
  return G;
}

struct HsgpMapFit {
  MapResult map;
  WeightPosterior posterior;
};

// MAP fit of the low-rank model with a conjugate weight posterior at the
// optimum, ready for prediction.
HsgpMapFit fit_hsgp_map(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelFamily family,
                        const DomainConfig& domain, const BasisConfig& basis,
                        const PriorConfig& priors, int budget) {
  const HsgpDesign design = make_design(X, y, family, domain, basis);
  HsgpMapFit fit;
  fit.map = optimize_map(design, priors, MapInit{}, budget);
  const HsgpModel model{make_spec(family, fit.map.alpha, fit.map.lengthscales), domain, basis};
  fit.posterior = fit_hsgp(model, X, y, fit.map.sigma);
  return fit;
}

struct ExactMapFit {
  MapResult map;
  GPFit fit;
};

ExactMapFit fit_exact_map(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                          KernelFamily family, const PriorConfig& priors, int budget) {
  ExactMapFit out;
  out.map = optimize_map_exact(X, y, family, priors, MapInit{}, budget);
  out.fit = fit_exact(X, y, make_spec(family, out.map.alpha, out.map.lengthscales),
                      out.map.sigma);
  return out;
}

template <typename F>
double median_seconds(F&& once, int warmup, int evals, volatile double* sink) {
  for (int w = 0; w < warmup; ++w) *sink = *sink + once();
  std::vector<double> t(static_cast<std::size_t>(evals));
  for (int e = 0; e < evals; ++e) {
    const auto t0 = std::chrono::steady_clock::now();
    *sink = *sink + once();
    const auto t1 = std::chrono::steady_clock::now();
    t[static_cast<std::size_t>(e)] = std::chrono::duration<double>(t1 - t0).count();
  }
  return quantile(t, 0.5);
}

}  // namespace

std::string split_name(Split s) {
  switch (s) {
    case Split::Train:
      return "train";
    case Split::InterpTest:
      return "interp-test";
    case Split::ExtrapTest:
      return "extrap-test";
  }
  throw std::invalid_argument("split_name: unknown split");
}

Split split_from_name(const std::string& name) {
  if (name == "train") return Split::Train;
  if (name == "interp-test") return Split::InterpTest;
  if (name == "extrap-test") return Split::ExtrapTest;
  throw std::invalid_argument("split_from_name: unknown label " + name);
}

std::vector<int> Dataset::indices(Split s) const {
  std::vector<int> idx;
  for (int i = 0; i < n(); ++i) {
    if (split[static_cast<std::size_t>(i)] == s) idx.push_back(i);
  }
  return idx;
}

Eigen::MatrixXd Dataset::inputs(Split s) const {
  const std::vector<int> idx = indices(s);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), X.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(idx[i]);
  return out;
}

Eigen::VectorXd Dataset::targets(Split s) const {
  const std::vector<int> idx = indices(s);
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = y[idx[i]];
  return out;
}

Eigen::VectorXd Dataset::latents(Split s) const {
  const std::vector<int> idx = indices(s);
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i) out[static_cast<Eigen::Index>(i)] = f[idx[i]];
  return out;
}

void SimulateConfig::validate() const {
  spec.validate();
  if (spec.dim() != 1) throw std::invalid_argument("simulate_dataset: univariate generator only");
  if (!(noise_sd >= 0.0)) throw std::invalid_argument("simulate_dataset: noise_sd must be >= 0");
  if (n < 2) throw std::invalid_argument("simulate_dataset: n >= 2 required");
  if (!(high > low)) throw std::invalid_argument("simulate_dataset: high must exceed low");
  if (n_extrap < 0 || n_interp < 0 || n_extrap + n_interp > n) {
    throw std::invalid_argument("simulate_dataset: split sizes exceed n");
  }
}

Dataset simulate_dataset(const SimulateConfig& config) {
  config.validate();
  const int n = config.n;
  // Stream 0: inputs; stream 1: latent draw + noise; stream 2: interp subset.
  Rng rng_x(mix_seed(config.seed, 0));
  std::vector<double> xs(static_cast<std::size_t>(n));
  for (double& x : xs) x = rng_x.uniform(config.low, config.high);
  std::sort(xs.begin(), xs.end());
  Eigen::MatrixXd X(n, 1);
  for (int i = 0; i < n; ++i) X(i, 0) = xs[static_cast<std::size_t>(i)];

  const auto [f, y] = sample_prior(config.spec, X, config.noise_sd, mix_seed(config.seed, 1));

  Dataset data;
  data.X = X;
  data.f = f;
  data.y = y;
  data.true_spec = config.spec;
  data.noise_sd = config.noise_sd;
  data.seed = config.seed;
  data.split.assign(static_cast<std::size_t>(n), Split::Train);
  const int n_lo = config.n_extrap / 2;
  const int n_hi = config.n_extrap - n_lo;
  for (int i = 0; i < n_lo; ++i) data.split[static_cast<std::size_t>(i)] = Split::ExtrapTest;
  for (int i = n - n_hi; i < n; ++i) data.split[static_cast<std::size_t>(i)] = Split::ExtrapTest;
  std::vector<int> pool;
  for (int i = n_lo; i < n - n_hi; ++i) pool.push_back(i);
  Rng rng_pick(mix_seed(config.seed, 2));
  for (int i = 0; i < config.n_interp; ++i) {
    const std::size_t j = static_cast<std::size_t>(i) +
                          rng_pick.below(pool.size() - static_cast<std::size_t>(i));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    data.split[static_cast<std::size_t>(pool[static_cast<std::size_t>(i)])] = Split::InterpTest;
  }
  return data;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_dataset_csv: cannot open " + path);
  json meta;
  meta["kernel"] = to_json(data.true_spec);
  meta["noise_sd"] = data.noise_sd;
  meta["seed"] = data.seed;
  out << "# hsgp-dataset " << meta.dump() << "\n";
  const int D = static_cast<int>(data.X.cols());
  if (D == 1) {
    out << "x";
  } else {
    for (int d = 0; d < D; ++d) out << (d == 0 ? "x_1" : ",x_" + std::to_string(d + 1));
  }
  out << ",f,y,split\n";
  for (int i = 0; i < data.n(); ++i) {
    for (int d = 0; d < D; ++d) out << (d == 0 ? "" : ",") << fmt17(data.X(i, d));
    out << ',' << fmt17(data.f[i]) << ',' << fmt17(data.y[i]) << ','
        << split_name(data.split[static_cast<std::size_t>(i)]) << "\n";
  }
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("read_dataset_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("read_dataset_csv: empty file");
  const std::string marker = "# hsgp-dataset ";
  if (line.rfind(marker, 0) != 0) {
    throw std::invalid_argument("read_dataset_csv: missing dataset marker line");
  }
  json meta;
  try {
    meta = json::parse(line.substr(marker.size()));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("read_dataset_csv: bad metadata: ") + e.what());
  }
  Dataset data;
  try {
    data.true_spec = kernel_from_json(meta.at("kernel"));
    data.noise_sd = meta.at("noise_sd").get<double>();
    data.seed = meta.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("read_dataset_csv: bad metadata: ") + e.what());
  }
  if (!std::getline(in, line)) throw std::invalid_argument("read_dataset_csv: missing header");
  int cols = 1;
  for (char ch : line) cols += ch == ',' ? 1 : 0;
  const int D = cols - 3;
  if (D < 1) throw std::invalid_argument("read_dataset_csv: malformed header " + line);
  std::vector<std::vector<double>> xrows;
  std::vector<Split> splits;
  std::vector<double> fs, ys;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != cols) {
      throw std::invalid_argument("read_dataset_csv: malformed row " + line);
    }
    std::vector<double> xr(static_cast<std::size_t>(D));
    try {
      for (int d = 0; d < D; ++d) xr[static_cast<std::size_t>(d)] = std::stod(cells[static_cast<std::size_t>(d)]);
      fs.push_back(std::stod(cells[static_cast<std::size_t>(D)]));
      ys.push_back(std::stod(cells[static_cast<std::size_t>(D + 1)]));
    } catch (const std::exception&) {
      throw std::invalid_argument("read_dataset_csv: non-numeric cell in row " + line);
    }
    splits.push_back(split_from_name(cells[static_cast<std::size_t>(D + 2)]));
    xrows.push_back(std::move(xr));
  }
  const int n = static_cast<int>(xrows.size());
  if (n == 0) throw std::invalid_argument("read_dataset_csv: no data rows");
  data.X.resize(n, D);
  data.f.resize(n);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < D; ++d) data.X(i, d) = xrows[static_cast<std::size_t>(i)][static_cast<std::size_t>(d)];
    data.f[i] = fs[static_cast<std::size_t>(i)];
    data.y[i] = ys[static_cast<std::size_t>(i)];
  }
  data.split = std::move(splits);
  return data;
}

MapResult optimize_map_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                             KernelFamily family, const PriorConfig& priors,
                             const MapInit& init, int budget) {
  priors.validate();
  if (X.rows() != y.size() || X.rows() < 2) {
    throw std::invalid_argument("optimize_map_exact: need matching X, y with n >= 2");
  }
  if (budget < 10) throw std::invalid_argument("optimize_map_exact: budget too small");
  const int D = static_cast<int>(X.cols());
  const Eigen::VectorXd theta0 = map_theta0(init, data_half_ranges(X));
  const DenseLogPosterior target{X, y, family, priors};
  const NelderMeadResult nm = nelder_mead(
      [&](const Eigen::VectorXd& theta) { return -target(theta); }, theta0, budget);
  MapResult result;
  result.sigma = std::exp(nm.x[0]);
  result.alpha = std::exp(nm.x[1]);
  result.lengthscales.resize(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) {
    result.lengthscales[static_cast<std::size_t>(d)] = std::exp(nm.x[2 + d]);
  }
  result.objective = -nm.fmin;
  result.converged = nm.converged;
  result.evaluations = nm.evaluations;
  return result;
}

Eigen::MatrixXd mcmc_sample_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  KernelFamily family, const PriorConfig& priors,
                                  const McmcConfig& config) {
  priors.validate();
  if (config.iterations < 1 || config.warmup < 0) {
    throw std::invalid_argument("mcmc_sample_exact: iterations >= 1, warmup >= 0 required");
  }
  const int D = static_cast<int>(X.cols());
  const int p = 2 + D;
  const DenseLogPosterior target{X, y, family, priors};
  const std::vector<double> S = data_half_ranges(X);

  Eigen::VectorXd theta(p);
  theta[0] = std::log(0.5);
  theta[1] = std::log(1.0);
  for (int d = 0; d < D; ++d) {
    theta[2 + d] = std::log(S[static_cast<std::size_t>(d)] > 0.0
                                ? 0.3 * S[static_cast<std::size_t>(d)]
                                : 0.3);
  }
  double lp = target(theta);
  if (!std::isfinite(lp)) {
    throw std::invalid_argument("mcmc_sample_exact: non-finite log-density at init");
  }

  Rng rng(config.seed);
  Eigen::MatrixXd draws(config.iterations, p);
  double log_scale = std::log(0.3);
  int batch_accepts = 0;
  int batch_size = 0;
  int batch_index = 0;
  const int total = config.warmup + config.iterations;
  for (int iter = 0; iter < total; ++iter) {
    Eigen::VectorXd proposal(p);
    const double step = std::exp(log_scale);
    for (int k = 0; k < p; ++k) proposal[k] = theta[k] + step * rng.normal();
    const double lp_new = target(proposal);
    const bool accept = std::log(rng.uniform() + 1e-300) < lp_new - lp;
    if (accept) {
      theta = proposal;
      lp = lp_new;
    }
    if (iter < config.warmup) {
      batch_accepts += accept ? 1 : 0;
      if (++batch_size == 25) {
        ++batch_index;
        const double rate = static_cast<double>(batch_accepts) / batch_size;
        log_scale += (rate - config.target_accept) / std::sqrt(static_cast<double>(batch_index));
        batch_accepts = 0;
        batch_size = 0;
      }
      continue;
    }
    const int row = iter - config.warmup;
    for (int k = 0; k < p; ++k) draws(row, k) = std::exp(theta[k]);
  }
  return draws;
}

std::vector<RmseGridRow> run_rmse_grid(const RmseGridConfig& config) {
  config.data.validate();
  config.priors.validate();
  if (config.seeds < 1) throw std::invalid_argument("run_rmse_grid: seeds >= 1 required");
  if (config.ms.empty() || config.cs.empty()) {
    throw std::invalid_argument("run_rmse_grid: empty grid");
  }
  for (int m : config.ms) {
    if (m < 1) throw std::invalid_argument("run_rmse_grid: m >= 1 required");
  }
  for (double c : config.cs) {
    if (!(c >= 1.0)) throw std::invalid_argument("run_rmse_grid: c >= 1 required");
  }
  const KernelFamily family = config.data.spec.family;
  const std::size_t cells = config.ms.size() * config.cs.size();
  std::vector<double> sum_mean(cells, 0.0), sum_sd(cells, 0.0);

  for (int s = 0; s < config.seeds; ++s) {
    SimulateConfig dc = config.data;
    dc.seed = mix_seed(config.seed, static_cast<std::uint64_t>(s));
    const Dataset data = simulate_dataset(dc);
    const Eigen::MatrixXd Xtr = data.inputs(Split::Train);
    const Eigen::VectorXd ytr = data.targets(Split::Train);
    const ExactMapFit exact =
        fit_exact_map(Xtr, ytr, family, config.priors, config.exact_map_budget);
    const Eigen::MatrixXd G =
        interior_grid(Xtr, config.grid_points, config.interior_fraction);
    const Prediction pe = predict_exact(exact.fit, G);

    parallel_for(cells, [&](std::size_t cell) {
      const std::size_t mi = cell / config.cs.size();
      const std::size_t ci = cell % config.cs.size();
      const int m = config.ms[mi];
      const double c = config.cs[ci];
      const DomainConfig domain = DomainConfig::from_data(Xtr, {c});
      const BasisConfig basis = build_tuples({m});
      const HsgpMapFit hsgp =
          fit_hsgp_map(Xtr, ytr, family, domain, basis, config.priors, config.map_budget);
      const Prediction ph = predict_hsgp(hsgp.posterior, G);
      sum_mean[cell] += rms_diff(ph.mean, pe.mean);
      sum_sd[cell] += rms_diff(ph.sd, pe.sd);
    });
  }

  std::vector<RmseGridRow> rows(cells);
  for (std::size_t cell = 0; cell < cells; ++cell) {
    const std::size_t mi = cell / config.cs.size();
    const std::size_t ci = cell % config.cs.size();
    rows[cell].m = config.ms[mi];
    rows[cell].c = config.cs[ci];
    rows[cell].rmse_mean = sum_mean[cell] / config.seeds;
    rows[cell].rmse_sd = sum_sd[cell] / config.seeds;
  }
  return rows;
}

void write_rmse_grid_csv(const std::string& path, const std::vector<RmseGridRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_rmse_grid_csv: cannot open " + path);
  out << "m,c,rmse_mean_vs_exact,rmse_sd_vs_exact\n";
  for (const RmseGridRow& r : rows) {
    out << r.m << ',' << fmt17(r.c) << ',' << fmt17(r.rmse_mean) << ',' << fmt17(r.rmse_sd)
        << "\n";
  }
}

std::vector<RecoveryRow> run_lengthscale_recovery(const RecoveryConfig& config) {
  config.priors.validate();
  if (config.true_lengthscales.empty()) {
    throw std::invalid_argument("run_lengthscale_recovery: empty lengthscale grid");
  }
  if (config.reps < 1) throw std::invalid_argument("run_lengthscale_recovery: reps >= 1");
  if (config.m < 1 || !(config.c >= 1.0)) {
    throw std::invalid_argument("run_lengthscale_recovery: m >= 1 and c >= 1 required");
  }
  // The diagnostic threshold depends only on (family, m, c); computed once.
  const std::optional<double> threshold_ratio =
      min_lengthscale(config.family, config.m, config.c);

  const std::size_t cells = config.true_lengthscales.size() * static_cast<std::size_t>(config.reps);
  std::vector<RecoveryRow> rows(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const std::size_t ei = cell / static_cast<std::size_t>(config.reps);
    const int rep = static_cast<int>(cell % static_cast<std::size_t>(config.reps));
    const double true_ell = config.true_lengthscales[ei];

    SimulateConfig dc;
    dc.spec = make_spec(config.family, config.alpha, {true_ell});
    dc.noise_sd = config.noise_sd;
    dc.n = config.n;
    dc.low = config.low;
    dc.high = config.high;
    dc.n_extrap = 0;
    dc.n_interp = 0;
    dc.seed = mix_seed(config.seed, cell);
    const Dataset data = simulate_dataset(dc);

    const ExactMapFit exact =
        fit_exact_map(data.X, data.y, config.family, config.priors, config.exact_map_budget);
    const DomainConfig domain = DomainConfig::from_data(data.X, {config.c});
    const BasisConfig basis = build_tuples({config.m});
    const HsgpMapFit hsgp = fit_hsgp_map(data.X, data.y, config.family, domain, basis,
                                         config.priors, config.map_budget);

    const Eigen::MatrixXd G =
        interior_grid(data.X, config.grid_points, config.interior_fraction);
    const Prediction pe = predict_exact(exact.fit, G);
    const Prediction ph = predict_hsgp(hsgp.posterior, G);

    const double S = domain.half_ranges[0];
    const FitCheck check =
        check_fit(hsgp.map.lengthscales[0], S, config.m, config.c, config.family);

    RecoveryRow row;
    row.true_ell = true_ell;
    row.rep = rep;
    row.ell_exact = exact.map.lengthscales[0];
    row.ell_hsgp = hsgp.map.lengthscales[0];
    row.rmse = rms_diff(ph.mean, pe.mean);
    row.threshold = threshold_ratio ? *threshold_ratio * S : -1.0;
    row.check_pass = check.pass;
    if (config.ci_draws > 0) {
      McmcConfig mc;
      mc.iterations = config.ci_draws;
      mc.warmup = config.ci_warmup;
      mc.seed = mix_seed(dc.seed, 1);
      const Eigen::MatrixXd draws =
          mcmc_sample_exact(data.X, data.y, config.family, config.priors, mc);
      std::vector<double> ell_draws(static_cast<std::size_t>(draws.rows()));
      for (Eigen::Index i = 0; i < draws.rows(); ++i) {
        ell_draws[static_cast<std::size_t>(i)] = draws(i, 2);
      }
      row.ci_lo = quantile(ell_draws, 0.025);
      row.ci_hi = quantile(ell_draws, 0.975);
    } else {
      row.ci_lo = kNan;
      row.ci_hi = kNan;
    }
    rows[cell] = row;
  });
  return rows;
}

void write_recovery_csv(const std::string& path, const std::vector<RecoveryRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_recovery_csv: cannot open " + path);
  out << "true_ell,ell_exact,ell_hsgp,ci_lo,ci_hi,min_ell_threshold,rmse\n";
  for (const RecoveryRow& r : rows) {
    out << fmt17(r.true_ell) << ',' << fmt17(r.ell_exact) << ',' << fmt17(r.ell_hsgp) << ','
        << fmt17(r.ci_lo) << ',' << fmt17(r.ci_hi) << ',' << fmt17(r.threshold) << ','
        << fmt17(r.rmse) << "\n";
  }
}

std::vector<InterpExtrapRow> run_interp_extrap(const InterpExtrapConfig& config) {
  config.data.validate();
  config.priors.validate();
  if (config.seeds < 1) throw std::invalid_argument("run_interp_extrap: seeds >= 1 required");
  if (config.ms.empty()) throw std::invalid_argument("run_interp_extrap: empty m grid");
  if (config.data.n_interp < 2) {
    throw std::invalid_argument("run_interp_extrap: interpolation split too small");
  }
  const KernelFamily family = config.data.spec.family;
  const std::size_t block = 1 + config.ms.size();
  std::vector<InterpExtrapRow> rows(static_cast<std::size_t>(config.seeds) * block);

  parallel_for(static_cast<std::size_t>(config.seeds), [&](std::size_t s) {
    SimulateConfig dc = config.data;
    dc.seed = mix_seed(config.seed, s);
    const Dataset data = simulate_dataset(dc);
    const Eigen::MatrixXd Xtr = data.inputs(Split::Train);
    const Eigen::VectorXd ytr = data.targets(Split::Train);
    const Eigen::MatrixXd Xint = data.inputs(Split::InterpTest);
    const Eigen::VectorXd fint = data.latents(Split::InterpTest);
    const Eigen::MatrixXd Xext = data.inputs(Split::ExtrapTest);
    const Eigen::VectorXd fext = data.latents(Split::ExtrapTest);
    const bool have_extrap = Xext.rows() > 0;

    const ExactMapFit exact =
        fit_exact_map(Xtr, ytr, family, config.priors, config.exact_map_budget);
    InterpExtrapRow er;
    er.method = "exact";
    er.m = -1;
    er.dataset_seed = dc.seed;
    er.srmse_interp = srmse(predict_exact(exact.fit, Xint).mean, fint);
    if (have_extrap) er.srmse_extrap = srmse(predict_exact(exact.fit, Xext).mean, fext);
    rows[s * block] = er;

    // Domain from the full input range so test points stay inside the box.
    for (std::size_t mi = 0; mi < config.ms.size(); ++mi) {
      const int m = config.ms[mi];
      const DomainConfig domain = DomainConfig::from_data(data.X, {config.c});
      const BasisConfig basis = build_tuples({m});
      const HsgpMapFit hsgp =
          fit_hsgp_map(Xtr, ytr, family, domain, basis, config.priors, config.map_budget);
      InterpExtrapRow hr;
      hr.method = "hsgp";
      hr.m = m;
      hr.dataset_seed = dc.seed;
      hr.srmse_interp = srmse(predict_hsgp(hsgp.posterior, Xint).mean, fint);
      if (have_extrap) hr.srmse_extrap = srmse(predict_hsgp(hsgp.posterior, Xext).mean, fext);
      rows[s * block + 1 + mi] = hr;
    }
  });
  return rows;
}

void write_interp_extrap_csv(const std::string& path, const std::vector<InterpExtrapRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_interp_extrap_csv: cannot open " + path);
  bool any_extrap = false;
  for (const InterpExtrapRow& r : rows) any_extrap = any_extrap || r.srmse_extrap.has_value();
  out << (any_extrap ? "method,m,srmse_interp,srmse_extrap\n" : "method,m,srmse_interp\n");
  for (const InterpExtrapRow& r : rows) {
    out << r.method << ',';
    if (r.m < 0) {
      out << '-';
    } else {
      out << r.m;
    }
    out << ',' << fmt17(r.srmse_interp);
    if (any_extrap) out << ',' << (r.srmse_extrap ? fmt17(*r.srmse_extrap) : std::string("nan"));
    out << "\n";
  }
}

std::vector<TimingRow> run_timing(const TimingConfig& config) {
  if (config.evals < 1 || config.warmup < 0) {
    throw std::invalid_argument("run_timing: evals >= 1, warmup >= 0 required");
  }
  if (config.hsgp_m < 1) throw std::invalid_argument("run_timing: hsgp_m >= 1 required");
  std::vector<TimingRow> rows;
  volatile double sink = 0.0;
  const PriorConfig priors;
  const std::vector<double> ell{0.3};

  auto make_inputs = [](int n) {
    Eigen::MatrixXd X(n, 1);
    for (int i = 0; i < n; ++i) X(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / (n - 1);
    return X;
  };

  for (int n : config.hsgp_ns) {
    if (n < 2) throw std::invalid_argument("run_timing: n >= 2 required");
    const Eigen::MatrixXd X = make_inputs(n);
    Rng rng(mix_seed(config.seed, static_cast<std::uint64_t>(n)));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    const DomainConfig domain = DomainConfig::from_data(X, {config.c});
    const BasisConfig basis = build_tuples({config.hsgp_m});
    const HsgpDesign design =
        make_design(X, y, KernelFamily::SquaredExponential, domain, basis);
    Eigen::VectorXd beta(design.m());
    for (int j = 0; j < design.m(); ++j) beta[j] = rng.normal();
    // One low-rank evaluation: full joint log-density with the design reused.
    const double seconds = median_seconds(
        [&] { return log_joint(design, 0.2, 1.0, ell, beta, priors); }, config.warmup,
        config.evals, &sink);
    rows.push_back({"hsgp", n, config.hsgp_m, seconds});
  }

  for (int n : config.exact_ns) {
    if (n < 2) throw std::invalid_argument("run_timing: n >= 2 required");
    const Eigen::MatrixXd X = make_inputs(n);
    Rng rng(mix_seed(config.seed, 1000000 + static_cast<std::uint64_t>(n)));
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y[i] = rng.normal();
    const KernelSpec spec = make_se(1.0, {0.3});
    // One dense evaluation: rebuild and refactorize the n x n system.
    const double seconds = median_seconds(
        [&] {
          const GPFit fit = fit_exact(X, y, spec, 0.2);
          return log_marginal_likelihood(fit);
        },
        config.warmup, config.evals, &sink);
    rows.push_back({"exact", n, -1, seconds});
  }
  return rows;
}

void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("write_timing_csv: cannot open " + path);
  out << "method,n,m,seconds_per_logdensity_eval\n";
  char buf[64];
  for (const TimingRow& r : rows) {
    out << r.method << ',' << r.n << ',';
    if (r.m < 0) {
      out << '-';
    } else {
      out << r.m;
    }
    std::snprintf(buf, sizeof(buf), "%.9g", r.seconds_per_eval);
    out << ',' << buf << "\n";
  }
}

}  // namespace hsgp
