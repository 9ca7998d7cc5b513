#pragma once

#include <string>

#include "dfr/matrix.hpp"

namespace dfr {

// Adam optimizer state for one parameter tensor. Moments start at zero and
// step_count increments by exactly one per update.
struct AdamState {
    Matrix first_moment;
    Matrix second_moment;
    long step_count = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    AdamState() = default;
    AdamState(std::size_t rows, std::size_t cols)
        : first_moment(rows, cols), second_moment(rows, cols) {}
    explicit AdamState(const Matrix& like)
        : first_moment(like.rows(), like.cols()), second_moment(like.rows(), like.cols()) {}
};

// Standard Adam update with bias correction, in place on `param`.
// `name` identifies the parameter in error messages.
void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               const std::string& name = "param");

}  // namespace dfr
