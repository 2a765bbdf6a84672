#include "rfqv/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace rfqv {

GaussLegendre gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("quadrature: node count must be positive");
  GaussLegendre g;
  g.x.resize(n);
  g.w.resize(n);
  const double pi = 3.14159265358979323846;
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Newton iteration from the Chebyshev-based initial guess
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    g.x[i] = -x;
    g.x[n - 1 - i] = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    g.w[i] = w;
    g.w[n - 1 - i] = w;
  }
  return g;
}

}  // namespace rfqv
