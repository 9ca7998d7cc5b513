#include "dfr/adam.hpp"

#include <cmath>

#include "dfr/errors.hpp"

namespace dfr {

void adam_step(Matrix& param, const Matrix& grad, AdamState& state, double lr,
               const std::string& name) {
    require_same_shape(param, grad, "adam_step(" + name + ")");
    require_same_shape(param, state.first_moment, "adam_step(" + name + ") state");
    if (lr <= 0.0) throw ConfigError("adam_step(" + name + "): lr must be positive");
    if (!all_finite(grad)) throw NumericError("adam_step: non-finite gradient for " + name);

    state.step_count += 1;
    const double b1 = state.beta1, b2 = state.beta2;
    const double bc1 = 1.0 - std::pow(b1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(b2, static_cast<double>(state.step_count));

    double* p = param.data();
    double* m = state.first_moment.data();
    double* v = state.second_moment.data();
    const double* g = grad.data();
    for (std::size_t i = 0; i < param.size(); ++i) {
        m[i] = b1 * m[i] + (1.0 - b1) * g[i];
        v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
        const double mhat = m[i] / bc1;
        const double vhat = v[i] / bc2;
        p[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
    require_finite(param, "adam_step(" + name + ") result");
}

}  // namespace dfr
