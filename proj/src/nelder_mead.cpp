#include "hsgp/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace hsgp {

NelderMeadResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                             const Eigen::VectorXd& x0, int budget, double step,
                             double ftol_rel) {
  const int p = static_cast<int>(x0.size());
  if (p < 1) throw std::invalid_argument("nelder_mead: empty start point");
  if (budget < p + 2) throw std::invalid_argument("nelder_mead: budget too small");
  const int nv = p + 1;
  int evals = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evals;
    return f(x);
  };

  std::vector<Eigen::VectorXd> simplex(static_cast<std::size_t>(nv), x0);
  std::vector<double> fval(static_cast<std::size_t>(nv));
  for (int i = 1; i < nv; ++i) simplex[static_cast<std::size_t>(i)][i - 1] += step;
  for (int i = 0; i < nv; ++i) {
    fval[static_cast<std::size_t>(i)] = eval(simplex[static_cast<std::size_t>(i)]);
  }

  bool converged = false;
  std::vector<int> order(static_cast<std::size_t>(nv));
  while (evals < budget) {
    for (int i = 0; i < nv; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return fval[static_cast<std::size_t>(a)] < fval[static_cast<std::size_t>(b)];
    });
    const int ibest = order[0];
    const int iworst = order[static_cast<std::size_t>(nv - 1)];
    const int isecond = order[static_cast<std::size_t>(nv - 2)];
    if (std::abs(fval[static_cast<std::size_t>(iworst)] - fval[static_cast<std::size_t>(ibest)]) <
        ftol_rel * (1.0 + std::abs(fval[static_cast<std::size_t>(ibest)]))) {
      converged = true;
      break;
    }
    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < nv - 1; ++i) {
      centroid += simplex[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
    }
    centroid /= (nv - 1);

    const Eigen::VectorXd xr = centroid + (centroid - simplex[static_cast<std::size_t>(iworst)]);
    const double fr = eval(xr);
    if (fr < fval[static_cast<std::size_t>(ibest)]) {
      const Eigen::VectorXd xe =
          centroid + 2.0 * (centroid - simplex[static_cast<std::size_t>(iworst)]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[static_cast<std::size_t>(iworst)] = xe;
        fval[static_cast<std::size_t>(iworst)] = fe;
      } else {
        simplex[static_cast<std::size_t>(iworst)] = xr;
        fval[static_cast<std::size_t>(iworst)] = fr;
      }
    } else if (fr < fval[static_cast<std::size_t>(isecond)]) {
      simplex[static_cast<std::size_t>(iworst)] = xr;
      fval[static_cast<std::size_t>(iworst)] = fr;
    } else {
      const bool outside = fr < fval[static_cast<std::size_t>(iworst)];
      const Eigen::VectorXd& base = outside ? xr : simplex[static_cast<std::size_t>(iworst)];
      const Eigen::VectorXd xc = centroid + 0.5 * (base - centroid);
      const double fc = eval(xc);
      if (fc < std::min(fr, fval[static_cast<std::size_t>(iworst)])) {
        simplex[static_cast<std::size_t>(iworst)] = xc;
        fval[static_cast<std::size_t>(iworst)] = fc;
      } else {
        const Eigen::VectorXd xbest = simplex[static_cast<std::size_t>(ibest)];
        for (int i = 1; i < nv; ++i) {
          const int idx = order[static_cast<std::size_t>(i)];
          simplex[static_cast<std::size_t>(idx)] =
              xbest + 0.5 * (simplex[static_cast<std::size_t>(idx)] - xbest);
          fval[static_cast<std::size_t>(idx)] = eval(simplex[static_cast<std::size_t>(idx)]);
        }
      }
    }
  }

  int ibest = 0;
  for (int i = 1; i < nv; ++i) {
    if (fval[static_cast<std::size_t>(i)] < fval[static_cast<std::size_t>(ibest)]) ibest = i;
  }
  NelderMeadResult result;
  result.x = simplex[static_cast<std::size_t>(ibest)];
  result.fmin = fval[static_cast<std::size_t>(ibest)];
  result.converged = converged;
  result.evaluations = evals;
  return result;
}

}  // namespace hsgp
