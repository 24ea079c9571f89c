#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <vector>

#include "momsens/linalg.hpp"

namespace momsens {

struct NelderMeadOptions {
  double simplex_tol = 1e-8;  // converged when the simplex diameter drops below
  double fval_tol = 1e-12;    // ... and the criterion spread below
  int max_iter = 0;           // 0: 400 * dimension
};

struct MinimizeResult {
  Vector x;
  double fval = 0.0;
  int n_evals = 0;
  bool converged = false;
};

// Downhill simplex with the standard reflection/expansion/contraction
// coefficients and fminsearch-style initial steps (5% of each coordinate,
// 0.00025 for zero coordinates).
template <class F>
MinimizeResult nelder_mead(F&& f, const Vector& x0, NelderMeadOptions opt = {}) {
  const int n = static_cast<int>(x0.size());
  const int max_iter = opt.max_iter > 0 ? opt.max_iter : 400 * std::max(n, 1);
  int evals = 0;
  auto eval = [&](const Vector& x) {
    ++evals;
    return f(x);
  };

  std::vector<Vector> v(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (int i = 0; i < n; ++i) {
    double step = 0.05 * std::abs(x0(i));
    if (step == 0.0) step = 0.00025;
    v[i + 1](i) += step;
  }
  for (int i = 0; i <= n; ++i) fv[i] = eval(v[i]);

  std::vector<int> order(n + 1);
  auto sort_simplex = [&]() {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return fv[a] < fv[b]; });
  };

  bool converged = false;
  for (int iter = 0; iter < max_iter; ++iter) {
    sort_simplex();
    const int best = order[0], worst = order[n], second = order[n - 1];

    double diameter = 0.0;
    for (int i = 0; i <= n; ++i)
      diameter = std::max(diameter, (v[i] - v[best]).cwiseAbs().maxCoeff());
    if (diameter < opt.simplex_tol && fv[worst] - fv[best] < opt.fval_tol) {
      converged = true;
      break;
    }

    Vector centroid = Vector::Zero(n);
    for (int i = 0; i <= n; ++i)
      if (i != worst) centroid += v[i];
    centroid /= n;

    const Vector xr = centroid + (centroid - v[worst]);
    const double fr = eval(xr);
    if (fr < fv[best]) {
      const Vector xe = centroid + 2.0 * (centroid - v[worst]);
      const double fe = eval(xe);
      if (fe < fr) {
        v[worst] = xe;
        fv[worst] = fe;
      } else {
        v[worst] = xr;
        fv[worst] = fr;
      }
    } else if (fr < fv[second]) {
      v[worst] = xr;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Vector xc = centroid + 0.5 * ((outside ? xr : v[worst]) - centroid);
      const double fc = eval(xc);
      if (fc < (outside ? fr : fv[worst])) {
        v[worst] = xc;
        fv[worst] = fc;
      } else {
        for (int i = 0; i <= n; ++i) {
          if (i == best) continue;
          v[i] = v[best] + 0.5 * (v[i] - v[best]);
          fv[i] = eval(v[i]);
        }
      }
    }
  }

  sort_simplex();
  return MinimizeResult{v[order[0]], fv[order[0]], evals, converged};
}

}  // namespace momsens
