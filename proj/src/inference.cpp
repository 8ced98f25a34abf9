#include "hsgp/inference.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hsgp/errors.hpp"
#include "hsgp/nelder_mead.hpp"
#include "hsgp/rng.hpp"

namespace hsgp {

namespace {

constexpr double kPi = std::numbers::pi;

Eigen::MatrixXd centered(const Eigen::MatrixXd& X, const DomainConfig& domain) {
  Eigen::MatrixXd Xc = X;
  for (int d = 0; d < domain.dim(); ++d) {
    Xc.col(d).array() -= domain.centers[static_cast<std::size_t>(d)];
  }
  return Xc;
}

// Spectral values over precomputed sqrt-eigenvalue rows for (family, alpha,
// ell); the vectorized twin of spectral_density_multi for the sampler's hot
// path.
Eigen::VectorXd spectral_values(KernelFamily family, double alpha,
                                const std::vector<double>& ell,
                                const Eigen::MatrixXd& sqrt_eigs) {
  const int D = static_cast<int>(ell.size());
  double prod_ell = 1.0;
  for (double l : ell) prod_ell *= l;
  Eigen::VectorXd q = Eigen::VectorXd::Zero(sqrt_eigs.rows());
  for (int d = 0; d < D; ++d) {
    q += (ell[static_cast<std::size_t>(d)] * ell[static_cast<std::size_t>(d)]) *
         sqrt_eigs.col(d).array().square().matrix();
  }
  switch (family) {
    case KernelFamily::SquaredExponential:
      return alpha * std::pow(2.0 * kPi, 0.5 * D) * prod_ell *
             (-0.5 * q.array()).exp().matrix();
    case KernelFamily::Matern32: {
      const double s3 = std::numbers::sqrt3;
      const double cd = std::pow(2.0, D + 1) * std::pow(kPi, 0.5 * (D - 1)) *
                        std::tgamma(0.5 * (D + 3)) * s3 * s3 * s3;
      return alpha * cd * prod_ell * (3.0 + q.array()).pow(-0.5 * (D + 3)).matrix();
    }
    case KernelFamily::PeriodicSE:
      throw std::invalid_argument("spectral_values: PeriodicSE unsupported");
  }
  throw std::invalid_argument("spectral_values: unknown family");
}

void check_positive_hyper(double sigma, double alpha, const std::vector<double>& ell) {
  if (!(sigma > 0.0) || !(alpha > 0.0)) {
    throw std::invalid_argument("hyperparameters sigma, alpha must be > 0");
  }
  for (double l : ell) {
    if (!(l > 0.0)) throw std::invalid_argument("lengthscales must be > 0");
  }
}

struct LogPosterior {
  const HsgpDesign& design;
  const PriorConfig& priors;

  // theta = (log sigma, log alpha, log ell_1..D); returns collapsed posterior
  // log-density including the log-scale Jacobian. Overflowed hyperparameters
  // and failed factorizations count as zero posterior mass so the search and
  // the sampler step away instead of aborting.
  double operator()(const Eigen::VectorXd& theta) const {
    const double neg_inf = -std::numeric_limits<double>::infinity();
    const double sigma = std::exp(theta[0]);
    const double alpha = std::exp(theta[1]);
    if (!std::isfinite(sigma) || !std::isfinite(alpha) || sigma <= 0.0 || alpha <= 0.0) {
      return neg_inf;
    }
    std::vector<double> ell(static_cast<std::size_t>(theta.size() - 2));
    for (std::size_t d = 0; d < ell.size(); ++d) {
      ell[d] = std::exp(theta[2 + d]);
      if (!std::isfinite(ell[d]) || ell[d] <= 0.0) return neg_inf;
    }
    double lp = 0.0;
    try {
      lp = collapsed_marginal(design, sigma, alpha, ell).lml;
    } catch (const NumericalError&) {
      return neg_inf;
    }
    lp += priors.noise_prior.log_density(sigma) + theta[0];
    lp += priors.alpha_prior.log_density(alpha) + theta[1];
    for (std::size_t d = 0; d < ell.size(); ++d) {
      lp += priors.lengthscale_prior.log_density(ell[d]) + theta[2 + d];
    }
    return std::isfinite(lp) ? lp : neg_inf;
  }
};

}  // namespace

double GammaPrior::log_density(double x) const {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

void PriorConfig::validate() const {
  for (const GammaPrior* p : {&noise_prior, &alpha_prior, &lengthscale_prior}) {
    if (!(p->shape > 0.0) || !(p->rate > 0.0)) {
      throw std::invalid_argument("PriorConfig: shapes and rates must be > 0");
    }
  }
}

WeightPosterior fit_weights(const Eigen::MatrixXd& Phi_scaled, const Eigen::VectorXd& y,
                            double noise_sd) {
  if (Phi_scaled.rows() != y.size()) throw std::invalid_argument("fit_weights: row mismatch");
  if (!(noise_sd > 0.0)) throw std::invalid_argument("fit_weights: noise_sd must be > 0");
  if (!Phi_scaled.allFinite() || !y.allFinite()) {
    throw std::invalid_argument("fit_weights: non-finite inputs");
  }
  const Eigen::Index m = Phi_scaled.cols();
  const double inv_s2 = 1.0 / (noise_sd * noise_sd);
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
  A.selfadjointView<Eigen::Lower>().rankUpdate(Phi_scaled.transpose(), inv_s2);
  // LLT reads only the lower triangle, which rankUpdate filled.
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("fit_weights: posterior precision not positive definite");
  }
  WeightPosterior post;
  post.noise_sd = noise_sd;
  post.mean = llt.solve(Phi_scaled.transpose() * y) * inv_s2;
  // Lower-triangular factor of the covariance A^-1 itself.
  Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(m, m));
  Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
  if (cov_llt.info() != Eigen::Success) {
    throw NumericalError("fit_weights: posterior covariance factorization failed");
  }
  post.cov_factor = cov_llt.matrixL();
  return post;
}

WeightPosterior fit_hsgp(const HsgpModel& model, const Eigen::MatrixXd& X,
                         const Eigen::VectorXd& y, double noise_sd) {
  const Eigen::MatrixXd Xc = centered(X, model.domain);
  const Eigen::MatrixXd Phi = design_matrix(Xc, model.domain, model.basis).Phi;
  const SpectralDiag diag = spectral_diag(model.spec, model.domain, model.basis);
  const Eigen::MatrixXd Phi_scaled =
      Phi * diag.values.array().sqrt().matrix().asDiagonal();
  WeightPosterior post = fit_weights(Phi_scaled, y, noise_sd);
  post.model = model;
  return post;
}

Prediction predict_hsgp(const WeightPosterior& post, const Eigen::MatrixXd& Xstar) {
  if (!post.model) {
    throw std::invalid_argument("predict_hsgp: posterior carries no model snapshot");
  }
  const HsgpModel& model = *post.model;
  const Eigen::MatrixXd Xc = centered(Xstar, model.domain);
  const Eigen::MatrixXd Phi = design_matrix(Xc, model.domain, model.basis).Phi;
  const SpectralDiag diag = spectral_diag(model.spec, model.domain, model.basis);
  const Eigen::MatrixXd Phi_scaled =
      Phi * diag.values.array().sqrt().matrix().asDiagonal();
  Prediction out;
  out.mean = Phi_scaled * post.mean;
  const Eigen::MatrixXd V = Phi_scaled * post.cov_factor;
  out.sd = V.rowwise().norm();
  return out;
}

HsgpDesign make_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, KernelFamily family,
                       const DomainConfig& domain, const BasisConfig& basis) {
  if (X.rows() != y.size()) throw std::invalid_argument("make_design: row mismatch");
  HsgpDesign design;
  design.family = family;
  design.domain = domain;
  design.basis = basis;
  const Eigen::MatrixXd Xc = centered(X, domain);
  design.Phi = design_matrix(Xc, domain, basis).Phi;
  design.sqrt_eigs = sqrt_eigenvalues(domain, basis);
  design.PhiT_Phi.noalias() = design.Phi.transpose() * design.Phi;
  design.PhiT_y.noalias() = design.Phi.transpose() * y;
  design.y = y;
  design.yty = y.squaredNorm();
  return design;
}

CollapsedState collapsed_marginal(const HsgpDesign& design, double sigma, double alpha,
                                  const std::vector<double>& ell) {
  check_positive_hyper(sigma, alpha, ell);
  if (static_cast<int>(ell.size()) != design.D()) {
    throw std::invalid_argument("collapsed_marginal: lengthscale dimension mismatch");
  }
  const int m = design.m();
  const int n = design.n();
  CollapsedState state;
  state.sigma2 = sigma * sigma;
  state.sqrt_diag =
      spectral_values(design.family, alpha, ell, design.sqrt_eigs).array().sqrt();
  // A = I + S Phi^T Phi S / sigma^2, b = S Phi^T y (S = diag(sqrt_diag)).
  Eigen::MatrixXd A = design.PhiT_Phi;
  A.array() *= (state.sqrt_diag * state.sqrt_diag.transpose()).array() / state.sigma2;
  A.diagonal().array() += 1.0;
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) {
    throw NumericalError("collapsed_marginal: inner factorization failed");
  }
  state.chol_A = llt.matrixL();
  state.b = state.sqrt_diag.asDiagonal() * design.PhiT_y;
  const Eigen::VectorXd w = state.chol_A.triangularView<Eigen::Lower>().solve(state.b);
  const double logdetA = 2.0 * state.chol_A.diagonal().array().log().sum();
  const double quad = (design.yty - w.squaredNorm() / state.sigma2) / state.sigma2;
  state.lml = -0.5 * (n * std::log(2.0 * kPi) + n * std::log(state.sigma2) + logdetA + quad);
  (void)m;
  return state;
}

double log_joint(const HsgpDesign& design, double sigma, double alpha,
                 const std::vector<double>& ell, const Eigen::VectorXd& beta,
                 const PriorConfig& priors, bool log_scale_jacobian) {
  check_positive_hyper(sigma, alpha, ell);
  priors.validate();
  if (beta.size() != design.m()) throw std::invalid_argument("log_joint: beta length != m*");
  const Eigen::VectorXd sqrt_diag =
      spectral_values(design.family, alpha, ell, design.sqrt_eigs).array().sqrt();
  const Eigen::VectorXd f = design.Phi * (sqrt_diag.array() * beta.array()).matrix();
  const double sigma2 = sigma * sigma;
  const int n = design.n();
  double lp = -0.5 * (n * std::log(2.0 * kPi * sigma2) +
                      (design.y - f).squaredNorm() / sigma2);
  lp += -0.5 * (beta.size() * std::log(2.0 * kPi) + beta.squaredNorm());
  lp += priors.noise_prior.log_density(sigma);
  lp += priors.alpha_prior.log_density(alpha);
  for (double l : ell) lp += priors.lengthscale_prior.log_density(l);
  if (log_scale_jacobian) {
    lp += std::log(sigma) + std::log(alpha);
    for (double l : ell) lp += std::log(l);
  }
  return lp;
}

MapResult optimize_map(const HsgpDesign& design, const PriorConfig& priors, const MapInit& init,
                       int budget) {
  priors.validate();
  if (budget < 10) throw std::invalid_argument("optimize_map: budget too small");
  const int D = design.D();
  const int p = 2 + D;
  Eigen::VectorXd theta0(p);
  theta0[0] = std::log(init.sigma);
  theta0[1] = std::log(init.alpha);
  for (int d = 0; d < D; ++d) {
    const double ell0 = init.lengthscales.empty()
                            ? 0.3 * design.domain.half_ranges[static_cast<std::size_t>(d)]
                            : init.lengthscales[static_cast<std::size_t>(d)];
    theta0[2 + d] = std::log(ell0);
  }
  const LogPosterior target{design, priors};
  const NelderMeadResult nm = nelder_mead(
      [&](const Eigen::VectorXd& theta) { return -target(theta); }, theta0, budget);
  MapResult result;
  result.sigma = std::exp(nm.x[0]);
  result.alpha = std::exp(nm.x[1]);
  result.lengthscales.resize(static_cast<std::size_t>(D));
  for (int d = 0; d < D; ++d) result.lengthscales[static_cast<std::size_t>(d)] = std::exp(nm.x[2 + d]);
  result.objective = -nm.fmin;
  result.converged = nm.converged;
  result.evaluations = nm.evaluations;
  return result;
}

McmcTrace mcmc_sample(const HsgpDesign& design, const PriorConfig& priors,
                      const McmcConfig& config) {
  priors.validate();
  if (config.iterations < 1 || config.warmup < 0) {
    throw std::invalid_argument("mcmc_sample: iterations >= 1, warmup >= 0 required");
  }
  const int D = design.D();
  const int p = 2 + D;
  const int m = design.m();
  const LogPosterior target{design, priors};

  Eigen::VectorXd theta(p);
  theta[0] = std::log(0.5);
  theta[1] = std::log(1.0);
  for (int d = 0; d < D; ++d) {
    theta[2 + d] = std::log(0.3 * design.domain.half_ranges[static_cast<std::size_t>(d)]);
  }
  double lp = target(theta);
  if (!std::isfinite(lp)) {
    throw std::invalid_argument("mcmc_sample: non-finite log-density at init");
  }

  Rng rng(config.seed);
  McmcTrace trace;
  trace.seed = config.seed;
  trace.warmup = config.warmup;
  trace.kept = config.iterations;
  trace.dim_hyper = p;
  trace.draws.resize(config.iterations, p + m);

  double log_scale = std::log(0.3);
  int accepted_kept = 0;
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
    accepted_kept += accept ? 1 : 0;
    // Exact conjugate draw of beta given theta: mean A^-1 b / sigma^2,
    // covariance A^-1; draw = mean + L^-T z.
    const double sigma = std::exp(theta[0]);
    const double alpha = std::exp(theta[1]);
    std::vector<double> ell(static_cast<std::size_t>(D));
    for (int d = 0; d < D; ++d) ell[static_cast<std::size_t>(d)] = std::exp(theta[2 + d]);
    const CollapsedState state = collapsed_marginal(design, sigma, alpha, ell);
    const Eigen::VectorXd mean = state.chol_A.triangularView<Eigen::Lower>().transpose().solve(
        state.chol_A.triangularView<Eigen::Lower>().solve(state.b / state.sigma2));
    Eigen::VectorXd z(m);
    for (int k = 0; k < m; ++k) z[k] = rng.normal();
    const Eigen::VectorXd beta =
        mean + state.chol_A.triangularView<Eigen::Lower>().transpose().solve(z);
    const int row = iter - config.warmup;
    trace.draws(row, 0) = sigma;
    trace.draws(row, 1) = alpha;
    for (int d = 0; d < D; ++d) trace.draws(row, 2 + d) = ell[static_cast<std::size_t>(d)];
    trace.draws.row(row).segment(p, m) = beta.transpose();
  }
  trace.acceptance_rate = static_cast<double>(accepted_kept) / config.iterations;
  return trace;
}

void McmcTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("McmcTrace::write_csv: cannot open " + path);
  const int D = dim_hyper - 2;
  const int m = static_cast<int>(draws.cols()) - dim_hyper;
  out << "iter,sigma,alpha";
  for (int d = 0; d < D; ++d) {
    out << ",lengthscale";
    if (D > 1) out << "_" << (d + 1);
  }
  for (int j = 1; j <= m; ++j) out << ",beta_" << j;
  out << "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    out << (i + 1);
    for (Eigen::Index j = 0; j < draws.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", draws(i, j));
      out << ',' << buf;
    }
    out << "\n";
  }
}

}  // namespace hsgp
