#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hsgp/exact_gp.hpp"
#include "hsgp/hsgp_model.hpp"
#include "hsgp/kernels.hpp"
#include "hsgp/laplace_basis.hpp"

namespace hsgp {

// Gamma(shape, rate) prior; mean = shape / rate (shape-rate convention, so
// the default lengthscale prior Gamma(3.75, 25) has mean 0.15).
struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;

  [[nodiscard]] double log_density(double x) const;
};

struct PriorConfig {
  GammaPrior noise_prior{1.0, 1.0};
  GammaPrior alpha_prior{1.0, 1.0};
  GammaPrior lengthscale_prior{3.75, 25.0};

  void validate() const;
};

// Model snapshot a weight posterior predicts through.
struct HsgpModel {
  KernelSpec spec;
  DomainConfig domain;
  BasisConfig basis;
};

// Gaussian posterior over standard-normal-prior weights: covariance
// (I + Phi~^T Phi~ / sigma^2)^-1, mean = cov Phi~^T y / sigma^2, where Phi~
// is the scaled design (sqrt spectral diagonal folded in). cov_factor is a
// lower-triangular factor with cov = cov_factor cov_factor^T.
struct WeightPosterior {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov_factor;
  std::optional<HsgpModel> model;  // unset when fit from a raw design matrix
  double noise_sd = 0.0;
};

[[nodiscard]] WeightPosterior fit_weights(const Eigen::MatrixXd& Phi_scaled,
                                          const Eigen::VectorXd& y, double noise_sd);

// Builds the scaled Laplace design for X (centered internally per
// model.domain.centers) and runs the conjugate update.
[[nodiscard]] WeightPosterior fit_hsgp(const HsgpModel& model, const Eigen::MatrixXd& X,
                                       const Eigen::VectorXd& y, double noise_sd);

// Latent predictive mean/sd through the model snapshot (requires model set).
[[nodiscard]] Prediction predict_hsgp(const WeightPosterior& post, const Eigen::MatrixXd& Xstar);

// Precomputed sufficient statistics: everything about (X, y) the collapsed
// objective needs, so one hyperparameter evaluation costs O(m^3) after this
// O(n m^2) setup. Phi is the unscaled design (hyperparameter-free).
struct HsgpDesign {
  Eigen::MatrixXd Phi;
  Eigen::MatrixXd sqrt_eigs;  // m* x D
  Eigen::MatrixXd PhiT_Phi;
  Eigen::VectorXd PhiT_y;
  Eigen::VectorXd y;
  double yty = 0.0;
  KernelFamily family{};
  DomainConfig domain;
  BasisConfig basis;

  [[nodiscard]] int n() const { return static_cast<int>(Phi.rows()); }
  [[nodiscard]] int m() const { return static_cast<int>(Phi.cols()); }
  [[nodiscard]] int D() const { return domain.dim(); }
};

[[nodiscard]] HsgpDesign make_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                     KernelFamily family, const DomainConfig& domain,
                                     const BasisConfig& basis);

// Collapsed (beta-marginalized) state at one hyperparameter setting:
// lml = log N(y | 0, Phi~ Phi~^T + sigma^2 I) evaluated in the m-dimensional
// form; chol_A and b support exact conjugate draws of beta.
struct CollapsedState {
  double lml = 0.0;
  Eigen::MatrixXd chol_A;   // lower, A = I + S PhiT_Phi S / sigma^2
  Eigen::VectorXd b;        // S Phi^T y
  Eigen::VectorXd sqrt_diag;
  double sigma2 = 0.0;
};

[[nodiscard]] CollapsedState collapsed_marginal(const HsgpDesign& design, double sigma,
                                                double alpha, const std::vector<double>& ell);

// Full joint log-density: Gaussian likelihood of y given the linearized f and
// sigma, standard-normal weights, Gamma priors on (sigma, alpha, ell_d), and
// optionally the log-scale Jacobian (sampling parameterization).
[[nodiscard]] double log_joint(const HsgpDesign& design, double sigma, double alpha,
                               const std::vector<double>& ell, const Eigen::VectorXd& beta,
                               const PriorConfig& priors, bool log_scale_jacobian = false);

struct MapResult {
  double sigma = 0.0;
  double alpha = 0.0;
  std::vector<double> lengthscales;
  double objective = 0.0;  // collapsed posterior log-density at the optimum
  bool converged = false;
  int evaluations = 0;
};

struct MapInit {
  double sigma = 0.3;
  double alpha = 1.0;
  std::vector<double> lengthscales;  // empty: 0.3 * S_d per dimension
};

// Nelder-Mead on log-hyperparameters maximizing the collapsed posterior.
// Deterministic given init; converged = false when the evaluation budget ran
// out before the 1e-6 relative improvement window closed.
[[nodiscard]] MapResult optimize_map(const HsgpDesign& design, const PriorConfig& priors,
                                     const MapInit& init = {}, int budget = 2000);

struct McmcConfig {
  int iterations = 1000;  // kept draws
  int warmup = 500;
  std::uint64_t seed = 0;
  double target_accept = 0.3;
};

// Kept draws on natural scale: column order sigma, alpha, ell_1..ell_D,
// beta_1..beta_m*.
struct McmcTrace {
  Eigen::MatrixXd draws;
  double acceptance_rate = 0.0;
  std::uint64_t seed = 0;
  int warmup = 0;
  int kept = 0;
  int dim_hyper = 0;  // 2 + D

  void write_csv(const std::string& path) const;
};

// Adaptive random-walk Metropolis on (log sigma, log alpha, log ell_d)
// targeting the collapsed posterior, with beta drawn exactly from its
// conjugate Gaussian conditional at each kept iteration
// (Gibbs-within-Metropolis); together they target the exact joint posterior.
[[nodiscard]] McmcTrace mcmc_sample(const HsgpDesign& design, const PriorConfig& priors,
                                    const McmcConfig& config);

}  // namespace hsgp
