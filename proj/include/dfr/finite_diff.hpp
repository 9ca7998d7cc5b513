#pragma once

#include <functional>

#include "dfr/matrix.hpp"

namespace dfr {

// Central-difference gradient of a scalar function, element by element:
// (f(x + h e_ij) - f(x - h e_ij)) / (2h). Used as the independent oracle
// for every analytic gradient in this repo; it only ever calls f.
Matrix finite_diff_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                            double h);

// Same quotient for a single element, for spot checks on large tensors.
double finite_diff_element(const std::function<double(const Matrix&)>& f, const Matrix& x,
                           std::size_t i, std::size_t j, double h);

}  // namespace dfr
