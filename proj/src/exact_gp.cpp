#include "hsgp/exact_gp.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "hsgp/errors.hpp"
#include "hsgp/rng.hpp"

namespace hsgp {

namespace {

constexpr double kPi = std::numbers::pi;

// LLT with jitter escalation; returns the lower factor and the jitter used.
std::pair<Eigen::MatrixXd, double> robust_cholesky(const Eigen::MatrixXd& A, double alpha,
                                                   double extra_diagonal) {
  for (double jitter = 1e-8 * alpha; jitter <= 1e-4 * alpha * (1.0 + 1e-12); jitter *= 10.0) {
    Eigen::MatrixXd M = A;
    M.diagonal().array() += extra_diagonal + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(M);
    if (llt.info() == Eigen::Success) {
      return {Eigen::MatrixXd(llt.matrixL()), jitter};
    }
  }
  throw NumericalError(
      "Cholesky failed after jitter escalation to 1e-4*alpha (n = " +
      std::to_string(A.rows()) + ", diagonal range [" +
      std::to_string(A.diagonal().minCoeff() + extra_diagonal) + ", " +
      std::to_string(A.diagonal().maxCoeff() + extra_diagonal) +
      "]); matrix is numerically indefinite");
}

}  // namespace

GPFit fit_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KernelSpec& spec,
                double noise_sd) {
  spec.validate();
  if (X.rows() < 1) throw std::invalid_argument("fit_exact: need n >= 1");
  if (y.size() != X.rows()) throw std::invalid_argument("fit_exact: y length != n");
  if (!(noise_sd > 0.0)) throw std::invalid_argument("fit_exact: noise_sd must be > 0");
  GPFit fit;
  fit.X = X;
  fit.y = y;
  fit.spec = spec;
  fit.noise_sd = noise_sd;
  const Eigen::MatrixXd K = gram_matrix(spec, X);
  auto [factor, jitter] = robust_cholesky(K, spec.alpha, noise_sd * noise_sd);
  fit.factor = std::move(factor);
  fit.jitter = jitter;
  return fit;
}

double log_marginal_likelihood(const GPFit& fit) {
  const Eigen::Index n = fit.y.size();
  const Eigen::VectorXd v = fit.factor.triangularView<Eigen::Lower>().solve(fit.y);
  const double logdet = 2.0 * fit.factor.diagonal().array().log().sum();
  return -0.5 * (n * std::log(2.0 * kPi) + logdet + v.squaredNorm());
}

Prediction predict_exact(const GPFit& fit, const Eigen::MatrixXd& Xstar, bool include_noise) {
  if (Xstar.cols() != fit.X.cols()) {
    throw std::invalid_argument("predict_exact: Xstar dimension mismatch");
  }
  const Eigen::Index n = fit.X.rows();
  const Eigen::Index q = Xstar.rows();
  Eigen::MatrixXd Ks(n, q);  // K(train, star)
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < q; ++j) {
      Ks(i, j) = covariance(fit.spec, fit.X.row(i).transpose(), Xstar.row(j).transpose());
    }
  }
  const Eigen::VectorXd alpha_vec =
      fit.factor.triangularView<Eigen::Lower>().transpose().solve(
          fit.factor.triangularView<Eigen::Lower>().solve(fit.y));
  Prediction out;
  out.mean = Ks.transpose() * alpha_vec;
  const Eigen::MatrixXd V = fit.factor.triangularView<Eigen::Lower>().solve(Ks);
  out.sd.resize(q);
  const double noise_var = include_noise ? fit.noise_sd * fit.noise_sd : 0.0;
  for (Eigen::Index j = 0; j < q; ++j) {
    double var = fit.spec.alpha - V.col(j).squaredNorm() + noise_var;
    if (var < 0.0) {
      if (var < -1e-10) {
        throw NumericalError("predict_exact: negative predictive variance " +
                             std::to_string(var));
      }
      var = 0.0;
    }
    out.sd[j] = std::sqrt(var);
  }
  return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_prior(const KernelSpec& spec,
                                                         const Eigen::MatrixXd& X,
                                                         double noise_sd, std::uint64_t seed) {
  spec.validate();
  if (noise_sd < 0.0) throw std::invalid_argument("sample_prior: noise_sd must be >= 0");
  const Eigen::Index n = X.rows();
  const Eigen::MatrixXd K = gram_matrix(spec, X);
  auto [factor, jitter] = robust_cholesky(K, spec.alpha, 0.0);
  (void)jitter;
  Rng rng(seed);
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z[i] = rng.normal();
  Eigen::VectorXd f = factor * z;
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) y[i] = f[i] + noise_sd * rng.normal();
  return {std::move(f), std::move(y)};
}

}  // namespace hsgp
