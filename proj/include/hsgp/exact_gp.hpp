#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>

#include "hsgp/kernels.hpp"

namespace hsgp {

// Dense exact-GP regression state. factor is the lower Cholesky factor of
// K + sigma^2 I + jitter I; jitter records the value actually used so
// low-rank comparisons can align their noise floor. Immutable after
// construction; predictions are thread-safe.
struct GPFit {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  KernelSpec spec;
  double noise_sd = 0.0;
  Eigen::MatrixXd factor;
  double jitter = 0.0;
};

// Cholesky of K + sigma^2 I + jitter I with jitter = 1e-8 alpha, escalated
// x10 up to 1e-4 alpha; throws NumericalError with a condition report if the
// factorization still fails.
[[nodiscard]] GPFit fit_exact(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                              const KernelSpec& spec, double noise_sd);

// log N(y | 0, K + sigma^2 I) from the stored factor.
[[nodiscard]] double log_marginal_likelihood(const GPFit& fit);

struct Prediction {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

// Conditional mean k*^T (K + sigma^2 I)^-1 y and latent (noise-free) sd;
// include_noise adds sigma^2 to the predictive variance.
[[nodiscard]] Prediction predict_exact(const GPFit& fit, const Eigen::MatrixXd& Xstar,
                                       bool include_noise = false);

// f = chol(K + jitter I) z with seeded standard normals; y = f + sigma eps.
[[nodiscard]] std::pair<Eigen::VectorXd, Eigen::VectorXd> sample_prior(const KernelSpec& spec,
                                                                       const Eigen::MatrixXd& X,
                                                                       double noise_sd,
                                                                       std::uint64_t seed);

}  // namespace hsgp
