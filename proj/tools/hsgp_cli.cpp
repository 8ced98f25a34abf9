#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hsgp/diagnostics.hpp"
#include "hsgp/errors.hpp"
#include "hsgp/experiments.hpp"
#include "hsgp/inference.hpp"
#include "hsgp/laplace_basis.hpp"
#include "hsgp/serialization.hpp"

namespace {

using hsgp::json;

// Common flags of every subcommand; --out and --seed override config fields.
struct CliArgs {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool out_set = false;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CliArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config path")->required();
  cmd->add_option("--out", args.out, "output path (overrides config \"out\")")
      ->each([&args](const std::string&) { args.out_set = true; });
  cmd->add_option("--seed", args.seed, "seed override (overrides config \"seed\")")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw std::invalid_argument("config field \"" + key + "\": " + e.what());
  }
}

std::string resolve_out(const json& cfg, const CliArgs& args) {
  if (args.out_set) return args.out;
  if (cfg.contains("out")) return get_or<std::string>(cfg, "out", "");
  throw std::invalid_argument("output path required: pass --out or set config \"out\"");
}

std::uint64_t resolve_seed(const json& cfg, const CliArgs& args, std::uint64_t fallback) {
  if (args.seed_set) return args.seed;
  return get_or<std::uint64_t>(cfg, "seed", fallback);
}

hsgp::KernelFamily family_or(const json& cfg, const std::string& key,
                             hsgp::KernelFamily fallback) {
  if (!cfg.contains(key)) return fallback;
  return hsgp::family_from_name(get_or<std::string>(cfg, key, ""));
}

hsgp::PriorConfig priors_or(const json& cfg, const hsgp::PriorConfig& fallback) {
  if (!cfg.contains("priors")) return fallback;
  return hsgp::priors_from_json(cfg.at("priors"));
}

hsgp::SimulateConfig simulate_from_json(const json& j) {
  hsgp::SimulateConfig c;
  if (j.contains("kernel")) c.spec = hsgp::kernel_from_json(j.at("kernel"));
  c.noise_sd = get_or(j, "noise_sd", c.noise_sd);
  c.n = get_or(j, "n", c.n);
  c.low = get_or(j, "low", c.low);
  c.high = get_or(j, "high", c.high);
  c.n_extrap = get_or(j, "n_extrap", c.n_extrap);
  c.n_interp = get_or(j, "n_interp", c.n_interp);
  c.seed = get_or(j, "seed", c.seed);
  return c;
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  return k % 2 == 1 ? v[k / 2] : 0.5 * (v[k / 2 - 1] + v[k / 2]);
}

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

json load_config(const CliArgs& args) { return hsgp::load_json_file(args.config_path); }

void run_simulate(const CliArgs& args) {
  const json cfg = load_config(args);
  hsgp::SimulateConfig sc = simulate_from_json(cfg);
  sc.seed = resolve_seed(cfg, args, sc.seed);
  const hsgp::Dataset data = hsgp::simulate_dataset(sc);
  const std::string out = resolve_out(cfg, args);
  hsgp::write_dataset_csv(out, data);
  std::cout << "wrote " << out << " (" << data.n() << " rows: "
            << data.indices(hsgp::Split::Train).size() << " train, "
            << data.indices(hsgp::Split::InterpTest).size() << " interp-test, "
            << data.indices(hsgp::Split::ExtrapTest).size() << " extrap-test)\n";
}

void write_predictions_csv(const std::string& path, const Eigen::MatrixXd& X,
                           const hsgp::Prediction& pred) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open " + path);
  const int D = static_cast<int>(X.cols());
  if (D == 1) {
    out << "x";
  } else {
    for (int d = 0; d < D; ++d) out << (d == 0 ? "x_1" : ",x_" + std::to_string(d + 1));
  }
  out << ",mean,sd\n";
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (int d = 0; d < D; ++d) out << (d == 0 ? "" : ",") << fmt17(X(i, d));
    out << ',' << fmt17(pred.mean[i]) << ',' << fmt17(pred.sd[i]) << "\n";
  }
}

void run_fit(const CliArgs& args) {
  const json cfg = load_config(args);
  const std::string dataset_path = get_or<std::string>(cfg, "dataset", "");
  if (dataset_path.empty()) throw std::invalid_argument("fit: config \"dataset\" required");
  const hsgp::Dataset data = hsgp::read_dataset_csv(dataset_path);
  const hsgp::KernelFamily family = family_or(cfg, "family", data.true_spec.family);
  const int m = get_or(cfg, "m", 30);
  const double c = get_or(cfg, "c", 1.5);
  const std::string method = get_or<std::string>(cfg, "method", "map");
  const hsgp::PriorConfig priors = priors_or(cfg, hsgp::PriorConfig{});

  const Eigen::MatrixXd Xtr = data.inputs(hsgp::Split::Train);
  const Eigen::VectorXd ytr = data.targets(hsgp::Split::Train);
  if (Xtr.rows() < 2) throw std::invalid_argument("fit: train split has fewer than 2 rows");
  std::vector<double> cs(static_cast<std::size_t>(data.X.cols()), c);
  std::vector<int> ms(static_cast<std::size_t>(data.X.cols()), m);
  // Domain spans the full dataset so test rows stay inside the expansion box.
  const hsgp::DomainConfig domain = hsgp::DomainConfig::from_data(data.X, cs);
  const hsgp::BasisConfig basis = hsgp::build_tuples(ms);
  const hsgp::HsgpDesign design = hsgp::make_design(Xtr, ytr, family, domain, basis);

  const std::string out = resolve_out(cfg, args);
  json fitted;
  fitted["family"] = hsgp::family_name(family);
  fitted["domain"] = hsgp::to_json(domain);
  fitted["basis"] = hsgp::to_json(basis);
  fitted["method"] = method;

  double sigma_hat = 0.0;
  double alpha_hat = 0.0;
  std::vector<double> ell_hat;
  if (method == "map") {
    const int budget = get_or(cfg, "map_budget", 2000);
    const hsgp::MapResult mr = hsgp::optimize_map(design, priors, hsgp::MapInit{}, budget);
    sigma_hat = mr.sigma;
    alpha_hat = mr.alpha;
    ell_hat = mr.lengthscales;
    fitted["converged"] = mr.converged;
    fitted["evaluations"] = mr.evaluations;
    fitted["objective"] = mr.objective;
  } else if (method == "mcmc") {
    hsgp::McmcConfig mc;
    mc.iterations = get_or(cfg, "iterations", mc.iterations);
    mc.warmup = get_or(cfg, "warmup", mc.warmup);
    mc.target_accept = get_or(cfg, "target_accept", mc.target_accept);
    mc.seed = resolve_seed(cfg, args, 0);
    const hsgp::McmcTrace trace = hsgp::mcmc_sample(design, priors, mc);
    trace.write_csv(out + "_trace.csv");
    // Point estimates for the prediction files: posterior medians.
    const int D = design.D();
    std::vector<double> col(static_cast<std::size_t>(trace.draws.rows()));
    auto column_median = [&](int j) {
      for (Eigen::Index i = 0; i < trace.draws.rows(); ++i) {
        col[static_cast<std::size_t>(i)] = trace.draws(i, j);
      }
      return median_of(col);
    };
    sigma_hat = column_median(0);
    alpha_hat = column_median(1);
    for (int d = 0; d < D; ++d) ell_hat.push_back(column_median(2 + d));
    fitted["acceptance_rate"] = trace.acceptance_rate;
    fitted["iterations"] = mc.iterations;
    fitted["warmup"] = mc.warmup;
    fitted["seed"] = mc.seed;
  } else {
    throw std::invalid_argument("fit: method must be \"map\" or \"mcmc\"");
  }

  fitted["sigma"] = sigma_hat;
  fitted["alpha"] = alpha_hat;
  fitted["lengthscales"] = ell_hat;

  hsgp::KernelSpec spec;
  switch (family) {
    case hsgp::KernelFamily::SquaredExponential:
      spec = hsgp::make_se(alpha_hat, ell_hat);
      break;
    case hsgp::KernelFamily::Matern32:
      spec = hsgp::make_matern32(alpha_hat, ell_hat);
      break;
    case hsgp::KernelFamily::PeriodicSE:
      throw std::invalid_argument("fit: periodic kernel not supported by this command");
  }
  const hsgp::HsgpModel model{spec, domain, basis};
  const hsgp::WeightPosterior post = hsgp::fit_hsgp(model, Xtr, ytr, sigma_hat);
  const hsgp::Prediction pred = hsgp::predict_hsgp(post, data.X);
  write_predictions_csv(out + "_predictions.csv", data.X, pred);
  hsgp::save_json_file(out + "_fitted.json", fitted);
  std::cout << "wrote " << out << "_predictions.csv and " << out << "_fitted.json";
  if (method == "mcmc") std::cout << " and " << out << "_trace.csv";
  std::cout << "\n";
}

void run_diagnose(const CliArgs& args) {
  const json cfg = load_config(args);
  const std::string fitted_path = get_or<std::string>(cfg, "fitted", "");
  if (fitted_path.empty()) throw std::invalid_argument("diagnose: config \"fitted\" required");
  const json fitted = hsgp::load_json_file(fitted_path);
  hsgp::KernelFamily family = hsgp::KernelFamily::SquaredExponential;
  hsgp::DomainConfig domain;
  hsgp::BasisConfig basis;
  std::vector<double> ell;
  try {
    family = hsgp::family_from_name(fitted.at("family").get<std::string>());
    domain = hsgp::domain_from_json(fitted.at("domain"));
    basis = hsgp::basis_from_json(fitted.at("basis"));
    ell = fitted.at("lengthscales").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("diagnose: bad fitted file: ") + e.what());
  }
  if (ell.size() != domain.half_ranges.size() || ell.size() != basis.counts.size()) {
    throw std::invalid_argument("diagnose: dimension mismatch in fitted file");
  }

  // The accuracy check is per dimension (univariate criterion applied to each
  // axis); the model passes when every dimension passes.
  bool all_pass = true;
  json dims = json::array();
  for (std::size_t d = 0; d < ell.size(); ++d) {
    const hsgp::FitCheck check =
        hsgp::check_fit(ell[d], domain.half_ranges[d], basis.counts[d],
                        domain.boundary_factors[d], family);
    all_pass = all_pass && check.pass;
    json row;
    row["dimension"] = d + 1;
    row["lengthscale"] = ell[d];
    row["pass"] = check.pass;
    row["margin"] = check.margin;
    if (check.threshold) row["min_lengthscale_over_S"] = *check.threshold;
    if (!check.remediation.empty()) row["remediation"] = check.remediation;
    dims.push_back(row);
    std::cout << "dim " << (d + 1) << ": " << (check.pass ? "pass" : "fail")
              << " margin=" << check.margin;
    if (check.threshold) {
      std::cout << " threshold=" << *check.threshold * domain.half_ranges[d];
    }
    if (!check.remediation.empty()) std::cout << " (" << check.remediation << ")";
    std::cout << "\n";
  }
  std::cout << (all_pass ? "pass" : "fail") << "\n";
  if (args.out_set || cfg.contains("out")) {
    json result;
    result["pass"] = all_pass;
    result["dimensions"] = dims;
    hsgp::save_json_file(resolve_out(cfg, args), result);
  }
}

void run_table(const CliArgs& args) {
  const json cfg = load_config(args);
  const hsgp::KernelFamily family =
      family_or(cfg, "family", hsgp::KernelFamily::SquaredExponential);
  const std::vector<double> ells = get_or<std::vector<double>>(
      cfg, "lengthscales_over_S", {0.1, 0.2, 0.3, 0.5, 0.8, 1.2});
  const std::vector<double> cs =
      get_or<std::vector<double>>(cfg, "cs", {1.05, 1.5, 2.5, 4.0});
  const std::vector<hsgp::TableRow> rows = hsgp::build_table(family, ells, cs);
  const std::string out = resolve_out(cfg, args);
  hsgp::write_table_csv(out, family, rows);
  std::cout << "wrote " << out << " (" << rows.size() << " cells)\n";
}

void run_rmse_grid(const CliArgs& args) {
  const json cfg = load_config(args);
  hsgp::RmseGridConfig rc;
  if (cfg.contains("data")) rc.data = simulate_from_json(cfg.at("data"));
  rc.ms = get_or(cfg, "ms", rc.ms);
  rc.cs = get_or(cfg, "cs", rc.cs);
  rc.seeds = get_or(cfg, "seeds", rc.seeds);
  rc.seed = resolve_seed(cfg, args, rc.seed);
  rc.priors = priors_or(cfg, rc.priors);
  rc.grid_points = get_or(cfg, "grid_points", rc.grid_points);
  rc.interior_fraction = get_or(cfg, "interior_fraction", rc.interior_fraction);
  rc.map_budget = get_or(cfg, "map_budget", rc.map_budget);
  rc.exact_map_budget = get_or(cfg, "exact_map_budget", rc.exact_map_budget);
  const std::vector<hsgp::RmseGridRow> rows = hsgp::run_rmse_grid(rc);
  const std::string out = resolve_out(cfg, args);
  hsgp::write_rmse_grid_csv(out, rows);
  std::cout << "wrote " << out << " (" << rows.size() << " cells)\n";
}

void run_recovery(const CliArgs& args) {
  const json cfg = load_config(args);
  hsgp::RecoveryConfig rc;
  rc.true_lengthscales = get_or(cfg, "true_lengthscales", rc.true_lengthscales);
  rc.reps = get_or(cfg, "reps", rc.reps);
  rc.m = get_or(cfg, "m", rc.m);
  rc.c = get_or(cfg, "c", rc.c);
  rc.family = family_or(cfg, "family", rc.family);
  rc.alpha = get_or(cfg, "alpha", rc.alpha);
  rc.noise_sd = get_or(cfg, "noise_sd", rc.noise_sd);
  rc.n = get_or(cfg, "n", rc.n);
  rc.low = get_or(cfg, "low", rc.low);
  rc.high = get_or(cfg, "high", rc.high);
  rc.priors = priors_or(cfg, rc.priors);
  rc.seed = resolve_seed(cfg, args, rc.seed);
  rc.map_budget = get_or(cfg, "map_budget", rc.map_budget);
  rc.exact_map_budget = get_or(cfg, "exact_map_budget", rc.exact_map_budget);
  rc.ci_draws = get_or(cfg, "ci_draws", rc.ci_draws);
  rc.ci_warmup = get_or(cfg, "ci_warmup", rc.ci_warmup);
  rc.grid_points = get_or(cfg, "grid_points", rc.grid_points);
  rc.interior_fraction = get_or(cfg, "interior_fraction", rc.interior_fraction);
  const std::vector<hsgp::RecoveryRow> rows = hsgp::run_lengthscale_recovery(rc);
  const std::string out = resolve_out(cfg, args);
  hsgp::write_recovery_csv(out, rows);
  std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
}

void run_interp_extrap(const CliArgs& args) {
  const json cfg = load_config(args);
  hsgp::InterpExtrapConfig ic;
  if (cfg.contains("data")) ic.data = simulate_from_json(cfg.at("data"));
  ic.ms = get_or(cfg, "ms", ic.ms);
  ic.c = get_or(cfg, "c", ic.c);
  ic.seeds = get_or(cfg, "seeds", ic.seeds);
  ic.seed = resolve_seed(cfg, args, ic.seed);
  ic.priors = priors_or(cfg, ic.priors);
  ic.map_budget = get_or(cfg, "map_budget", ic.map_budget);
  ic.exact_map_budget = get_or(cfg, "exact_map_budget", ic.exact_map_budget);
  const std::vector<hsgp::InterpExtrapRow> rows = hsgp::run_interp_extrap(ic);
  const std::string out = resolve_out(cfg, args);
  hsgp::write_interp_extrap_csv(out, rows);
  std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
}

void run_timing(const CliArgs& args) {
  const json cfg = load_config(args);
  hsgp::TimingConfig tc;
  tc.hsgp_ns = get_or(cfg, "hsgp_ns", tc.hsgp_ns);
  tc.hsgp_m = get_or(cfg, "hsgp_m", tc.hsgp_m);
  tc.c = get_or(cfg, "c", tc.c);
  tc.exact_ns = get_or(cfg, "exact_ns", tc.exact_ns);
  tc.evals = get_or(cfg, "evals", tc.evals);
  tc.warmup = get_or(cfg, "warmup", tc.warmup);
  tc.seed = resolve_seed(cfg, args, tc.seed);
  const std::vector<hsgp::TimingRow> rows = hsgp::run_timing(tc);
  const std::string out = resolve_out(cfg, args);
  hsgp::write_timing_csv(out, rows);
  std::cout << "wrote " << out << " (" << rows.size() << " rows)\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-rank Gaussian process regression toolkit"};
  app.require_subcommand(1);

  CliArgs a_sim, a_fit, a_diag, a_table, a_rmse, a_rec, a_ie, a_time;
  add_common(app.add_subcommand("simulate", "draw a dataset from a GP generator"), a_sim);
  add_common(app.add_subcommand("fit", "fit one model, write predictions and trace"), a_fit);
  add_common(app.add_subcommand("diagnose", "post-fit lengthscale accuracy check"), a_diag);
  add_common(app.add_subcommand("table", "minimum basis-size table over (ell/S, c)"), a_table);
  add_common(app.add_subcommand("rmse-grid", "accuracy vs (m, c) against the dense model"),
             a_rmse);
  add_common(app.add_subcommand("lengthscale-recovery", "estimate sweep with diagnostics"),
             a_rec);
  add_common(app.add_subcommand("interp-extrap", "SRMSE on held-out splits"), a_ie);
  add_common(app.add_subcommand("timing", "per-evaluation cost measurements"), a_time);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand("simulate")) run_simulate(a_sim);
    if (app.got_subcommand("fit")) run_fit(a_fit);
    if (app.got_subcommand("diagnose")) run_diagnose(a_diag);
    if (app.got_subcommand("table")) run_table(a_table);
    if (app.got_subcommand("rmse-grid")) run_rmse_grid(a_rmse);
    if (app.got_subcommand("lengthscale-recovery")) run_recovery(a_rec);
    if (app.got_subcommand("interp-extrap")) run_interp_extrap(a_ie);
    if (app.got_subcommand("timing")) run_timing(a_time);
  } catch (const hsgp::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::range_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::length_error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
