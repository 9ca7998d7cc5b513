#pragma once

#include <cstddef>
#include <vector>

#include "dfr/matrix.hpp"

namespace dfr {

struct RegistrationConfig {
    double alpha = 0.6;         // balance between source and target pull
    std::size_t inner_steps = 50;
    double inner_lr = 0.01;
    double tolerance = 1e-6;    // halve the step size when a step improves by less
};

struct RegistrationResult {
    Matrix registered;  // best iterate found
    double final_loss = 0.0;
    std::vector<double> loss_history;  // loss after each step, [0] is the initial loss
    std::size_t steps_used = 0;
};

struct RegistrationLoss {
    double loss = 0.0;
    Matrix grad;
};

// loss = sum |F - S| + alpha * sum |F - T|, with the subgradient
// sign(F - S) + alpha * sign(F - T) and sign(0) = 0.
RegistrationLoss registration_loss(const Matrix& f, const Matrix& s, const Matrix& t, double alpha);

// Minimizes the hybrid L1 loss from the initialization F = T - S with Adam.
// The step size halves whenever a step fails to improve the best loss by
// more than `tolerance`, so the iterate settles onto the minimizer instead
// of oscillating around it at a fixed amplitude.
RegistrationResult register_features(const Matrix& s, const Matrix& t,
                                     const RegistrationConfig& cfg);

}  // namespace dfr
