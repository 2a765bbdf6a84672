#pragma once

#include <vector>

namespace rfqv {

// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> x;
  std::vector<double> w;
};

GaussLegendre gauss_legendre(int n);

}  // namespace rfqv
