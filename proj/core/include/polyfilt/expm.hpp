#pragma once

#include "polyfilt/linalg.hpp"

namespace polyfilt {

// exp(M) by scaling and squaring with Pade approximants of degree
// 3, 5, 7, 9 or 13 chosen from ||M||_1. Throws NumericalError on
// non-finite input.
Matrix matrix_exponential(const Matrix& m);

}  // namespace polyfilt
