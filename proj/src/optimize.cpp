#include "rfqv/optimize.hpp"

#include <cmath>
#include <stdexcept>

namespace rfqv {

MinimizeResult brent_minimize(const std::function<double(double)>& f, double a, double b,
                              double tol, int max_iter) {
  if (!(a < b)) throw std::invalid_argument("optimize: empty bracket");
  const double gold = 0.5 * (3.0 - std::sqrt(5.0));
  double x = a + gold * (b - a);
  double w = x, v = x;
  double fx = f(x);
  double fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  int evals = 1;

  for (int iter = 0; iter < max_iter; ++iter) {
    const double mid = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - mid) <= tol2 - 0.5 * (b - a)) break;

    bool parabolic = false;
    if (std::abs(e) > tol1) {
      // Trial parabolic step through (v, w, x).
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double e_old = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * e_old) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = (mid > x) ? tol1 : -tol1;
        parabolic = true;
      }
    }
    if (!parabolic) {
      e = (x < mid) ? b - x : a - x;
      d = gold * e;
    }
    const double u = (std::abs(d) >= tol1) ? x + d : x + ((d > 0.0) ? tol1 : -tol1);
    const double fu = f(u);
    ++evals;
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return {x, fx, evals};
}

MinimizeResult minimize_scan_brent(const std::function<double(double)>& f, double lo, double hi,
                                   double scan_step, double tol) {
  if (!(lo < hi) || !(scan_step > 0.0))
    throw std::invalid_argument("optimize: bad scan range or step");
  const int cells = std::max(1, static_cast<int>(std::ceil((hi - lo) / scan_step)));
  double best_x = lo, best_f = f(lo);
  int evals = 1;
  for (int i = 1; i <= cells; ++i) {
    const double x = (i == cells) ? hi : lo + i * scan_step;
    const double fx = f(x);
    ++evals;
    if (fx < best_f) {
      best_f = fx;
      best_x = x;
    }
  }
  const double a = std::max(lo, best_x - scan_step);
  const double b = std::min(hi, best_x + scan_step);
  MinimizeResult r = brent_minimize(f, a, b, tol);
  r.evaluations += evals;
  if (best_f < r.fx) {
    r.x = best_x;
    r.fx = best_f;
  }
  return r;
}

}  // namespace rfqv
