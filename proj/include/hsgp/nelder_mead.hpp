#pragma once

#include <Eigen/Dense>
#include <functional>

namespace hsgp {

struct NelderMeadResult {
  Eigen::VectorXd x;
  double fmin = 0.0;
  bool converged = false;  // false: budget exhausted before the f-window closed
  int evaluations = 0;
};

// Classic Nelder-Mead minimizer (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Deterministic given x0. Stops when the simplex f-spread falls
// below ftol_rel * (1 + |f_best|) or the evaluation budget runs out.
[[nodiscard]] NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                                           const Eigen::VectorXd& x0, int budget,
                                           double step = 0.25, double ftol_rel = 1e-6);

}  // namespace hsgp
