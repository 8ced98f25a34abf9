#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsgp/exact_gp.hpp"
#include "hsgp/inference.hpp"
#include "hsgp/kernels.hpp"

namespace hsgp {

enum class Split : int { Train = 0, InterpTest = 1, ExtrapTest = 2 };

// "train" / "interp-test" / "extrap-test"; the CSV split-column vocabulary.
[[nodiscard]] std::string split_name(Split s);
[[nodiscard]] Split split_from_name(const std::string& name);

// Simulated regression dataset with known latent function values. Splits are
// disjoint and exhaustive; extrapolation-test inputs lie outside the
// train-input hull per dimension by construction (tail blocks of sorted x).
struct Dataset {
  Eigen::MatrixXd X;  // n x D, rows sorted ascending by first coordinate
  Eigen::VectorXd f;  // latent generator values
  Eigen::VectorXd y;  // f + noise
  std::vector<Split> split;
  KernelSpec true_spec;
  double noise_sd = 0.0;
  std::uint64_t seed = 0;

  [[nodiscard]] int n() const { return static_cast<int>(X.rows()); }
  [[nodiscard]] std::vector<int> indices(Split s) const;
  [[nodiscard]] Eigen::MatrixXd inputs(Split s) const;
  [[nodiscard]] Eigen::VectorXd targets(Split s) const;  // y entries
  [[nodiscard]] Eigen::VectorXd latents(Split s) const;  // f entries
};

// Defaults reproduce the univariate simulation study generator: a Matern-3/2
// draw with alpha = 1, ell = 0.15, noise sd 0.2, n = 250 uniform inputs on
// [-1, 1], split 155 train / 45 interpolation test / 50 extrapolation test.
// The extrapolation set takes the n_extrap/2 lowest and highest inputs; the
// interpolation set is a seeded random subset of the remaining middle block.
struct SimulateConfig {
  KernelSpec spec = make_matern32(1.0, {0.15});
  double noise_sd = 0.2;
  int n = 250;
  double low = -1.0;
  double high = 1.0;
  int n_extrap = 50;
  int n_interp = 45;
  std::uint64_t seed = 0;

  void validate() const;
};

[[nodiscard]] Dataset simulate_dataset(const SimulateConfig& config);

// Line 1 "# hsgp-dataset {json metadata}", then header "x[,...],f,y,split"
// and %.17g rows; read(write(d)) round-trips exactly, including split labels
// and generator metadata.
void write_dataset_csv(const std::string& path, const Dataset& data);
[[nodiscard]] Dataset read_dataset_csv(const std::string& path);

// MAP over the dense-GP hyperparameters (log marginal likelihood + Gamma
// log-priors, log-scale search); each objective evaluation refactorizes the
// n x n system. Init lengthscales default to 0.3 x data half-range.
[[nodiscard]] MapResult optimize_map_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                           KernelFamily family, const PriorConfig& priors,
                                           const MapInit& init = {}, int budget = 400);

// Adaptive random-walk Metropolis over the dense-GP hyperparameters; kept
// draws on natural scale, columns (sigma, alpha, ell_1..ell_D). The interval
// oracle for lengthscale-recovery rows.
[[nodiscard]] Eigen::MatrixXd mcmc_sample_exact(const Eigen::MatrixXd& X,
                                                const Eigen::VectorXd& y, KernelFamily family,
                                                const PriorConfig& priors,
                                                const McmcConfig& config);

// Accuracy-vs-cost grid: per (m, c) cell, fit the low-rank model and the
// dense model to the same draws by MAP and compare posterior predictive mean
// and sd on an interior evaluation grid. rmse_* are averaged over seeds.
struct RmseGridConfig {
  SimulateConfig data{make_se(1.0, {0.3}), 0.2, 250, -1.0, 1.0, 0, 0, 0};
  std::vector<int> ms{4, 8, 16, 32, 64};
  std::vector<double> cs{1.05, 1.5, 2.5};
  int seeds = 1;
  std::uint64_t seed = 0;
  PriorConfig priors;
  int grid_points = 101;
  double interior_fraction = 0.8;  // grid spans center +- fraction * S
  int map_budget = 500;
  int exact_map_budget = 400;
};

struct RmseGridRow {
  int m = 0;
  double c = 0.0;
  double rmse_mean = 0.0;  // predictive means, low-rank vs dense
  double rmse_sd = 0.0;    // predictive sds, low-rank vs dense
};

[[nodiscard]] std::vector<RmseGridRow> run_rmse_grid(const RmseGridConfig& config);

// Header "m,c,rmse_mean_vs_exact,rmse_sd_vs_exact".
void write_rmse_grid_csv(const std::string& path, const std::vector<RmseGridRow>& rows);

// Lengthscale recovery sweep: per (true ell, rep) cell, simulate, fit both
// models by MAP, record estimates, the post-fit diagnostic threshold, and the
// RMSE between the two posterior predictive means on an interior grid.
// ci_draws > 0 additionally runs the dense-model sampler and records the
// central 95% interval for ell.
struct RecoveryConfig {
  std::vector<double> true_lengthscales{0.1, 0.3, 1.0};
  int reps = 20;
  int m = 32;
  double c = 1.5;
  KernelFamily family = KernelFamily::SquaredExponential;
  double alpha = 1.0;
  double noise_sd = 0.2;
  int n = 200;
  double low = -1.0;
  double high = 1.0;
  // Study prior for ell is milder than the inference default so the sweep's
  // upper cells are not pinned to the prior mode.
  PriorConfig priors{GammaPrior{1.0, 1.0}, GammaPrior{1.0, 1.0}, GammaPrior{2.0, 4.0}};
  std::uint64_t seed = 0;
  int map_budget = 500;
  int exact_map_budget = 400;
  int ci_draws = 0;
  int ci_warmup = 300;
  int grid_points = 81;
  double interior_fraction = 0.8;
};

struct RecoveryRow {
  double true_ell = 0.0;
  int rep = 0;
  double ell_exact = 0.0;
  double ell_hsgp = 0.0;
  double ci_lo = 0.0;  // NaN when ci_draws == 0
  double ci_hi = 0.0;
  double threshold = -1.0;  // minimum estimable ell, input units; -1 not achievable
  double rmse = 0.0;        // predictive means, low-rank vs dense
  bool check_pass = false;
};

[[nodiscard]] std::vector<RecoveryRow> run_lengthscale_recovery(const RecoveryConfig& config);

// Header "true_ell,ell_exact,ell_hsgp,ci_lo,ci_hi,min_ell_threshold,rmse";
// rows ordered true_ell outer, rep inner.
void write_recovery_csv(const std::string& path, const std::vector<RecoveryRow>& rows);

// Interpolation/extrapolation comparison on the simulation-study generator:
// both models fit the train split by MAP, predict the latent function on the
// two test splits, and report SRMSE = RMSE against the latent truth divided
// by the truth's standard deviation on that split (documented convention,
// population sd). The low-rank domain is built from the full input range so
// test points stay inside the expansion box.
struct InterpExtrapConfig {
  SimulateConfig data{};
  std::vector<int> ms{80};
  double c = 1.2;
  int seeds = 5;
  std::uint64_t seed = 0;
  PriorConfig priors;
  int map_budget = 500;
  int exact_map_budget = 400;
};

struct InterpExtrapRow {
  std::string method;  // "exact" | "hsgp"
  int m = -1;          // -1 for the dense model, rendered "-"
  double srmse_interp = 0.0;
  std::optional<double> srmse_extrap;  // absent when the extrap split is empty
  std::uint64_t dataset_seed = 0;      // not a CSV column; rows are seed-major
};

[[nodiscard]] std::vector<InterpExtrapRow> run_interp_extrap(const InterpExtrapConfig& config);

// Header "method,m,srmse_interp,srmse_extrap"; the srmse_extrap column is
// dropped entirely when no row carries a value.
void write_interp_extrap_csv(const std::string& path, const std::vector<InterpExtrapRow>& rows);

// Per-evaluation log-density cost. One low-rank evaluation is log_joint on a
// precomputed design (linear in n at fixed m); one dense evaluation is a full
// refactorization plus log marginal likelihood (cubic in n). Reported value
// is the median of `evals` timed evaluations after `warmup` discarded ones.
struct TimingConfig {
  std::vector<int> hsgp_ns{1000, 2000, 4000, 8000};
  int hsgp_m = 30;
  double c = 1.5;
  std::vector<int> exact_ns{1000};
  int evals = 50;
  int warmup = 5;
  std::uint64_t seed = 0;
};

struct TimingRow {
  std::string method;  // "exact" | "hsgp"
  int n = 0;
  int m = -1;  // -1 rendered "-"
  double seconds_per_eval = 0.0;
};

[[nodiscard]] std::vector<TimingRow> run_timing(const TimingConfig& config);

// Header "method,n,m,seconds_per_logdensity_eval".
void write_timing_csv(const std::string& path, const std::vector<TimingRow>& rows);

}  // namespace hsgp
