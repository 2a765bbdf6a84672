#include "rfqv/dft.hpp"

#include <cmath>
#include <stdexcept>

namespace rfqv {

std::vector<std::complex<double>> dft2(const Grid& g) {
  const int n = g.n;
  if (n < 1) throw std::invalid_argument("dft: empty grid");
  const double two_pi = 2.0 * std::acos(-1.0);
  // Twiddle factors exp(-i 2 pi j / n), indexed by products mod n.
  std::vector<std::complex<double>> tw(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j)
    tw[static_cast<std::size_t>(j)] =
        std::complex<double>(std::cos(two_pi * j / n), -std::sin(two_pi * j / n));

  // Transform rows (over t2), then columns (over t1).
  std::vector<std::complex<double>> rows(static_cast<std::size_t>(n) * n);
  for (int t1 = 0; t1 < n; ++t1)
    for (int k2 = 0; k2 < n; ++k2) {
      std::complex<double> acc(0.0, 0.0);
      for (int t2 = 0; t2 < n; ++t2)
        acc += g.at(t1, t2) * tw[static_cast<std::size_t>((k2 * t2) % n)];
      rows[static_cast<std::size_t>(t1) * n + k2] = acc;
    }
  std::vector<std::complex<double>> out(static_cast<std::size_t>(n) * n);
  for (int k2 = 0; k2 < n; ++k2)
    for (int k1 = 0; k1 < n; ++k1) {
      std::complex<double> acc(0.0, 0.0);
      for (int t1 = 0; t1 < n; ++t1)
        acc += rows[static_cast<std::size_t>(t1) * n + k2] *
               tw[static_cast<std::size_t>((k1 * t1) % n)];
      out[static_cast<std::size_t>(k1) * n + k2] = acc;
    }
  return out;
}

std::vector<double> dft2_power(const Grid& g) {
  const auto c = dft2(g);
  std::vector<double> p(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) p[i] = std::norm(c[i]);
  return p;
}

}  // namespace rfqv
