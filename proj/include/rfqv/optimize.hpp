#pragma once

#include <functional>

namespace rfqv {

struct MinimizeResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
};

// Coarse grid scan over [lo, hi] with the given step, then Brent refinement
// inside the bracketing cell. f must be continuous; ties keep the first hit.
MinimizeResult minimize_scan_brent(const std::function<double(double)>& f, double lo, double hi,
                                   double scan_step, double tol);

// Classic Brent minimization on [a, b] to absolute tolerance tol.
MinimizeResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                              double tol, int max_iter = 200);

}  // namespace rfqv
