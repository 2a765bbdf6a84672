#pragma once

#include <complex>
#include <vector>

#include "rfqv/filters.hpp"

namespace rfqv {

// Row-column discrete Fourier transform of a square grid,
// X_hat(k) = sum_t x_t exp(-i 2 pi k.t / n), row-major output.
std::vector<std::complex<double>> dft2(const Grid& g);

// Squared moduli |X_hat(k)|^2, same layout.
std::vector<double> dft2_power(const Grid& g);

}  // namespace rfqv
