#include "dfr/registration.hpp"

#include <cmath>

#include "dfr/adam.hpp"
#include "dfr/errors.hpp"

namespace dfr {
namespace {

inline double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void validate(const RegistrationConfig& cfg) {
    if (cfg.alpha < 0.0) throw ConfigError("registration: alpha must be >= 0");
    if (cfg.inner_steps < 1) throw ConfigError("registration: inner_steps must be >= 1");
    if (cfg.inner_lr <= 0.0) throw ConfigError("registration: inner_lr must be positive");
    if (cfg.tolerance < 0.0) throw ConfigError("registration: tolerance must be >= 0");
}

}  // namespace

RegistrationLoss registration_loss(const Matrix& f, const Matrix& s, const Matrix& t, double alpha) {
    require_same_shape(f, s, "registration_loss F/S");
    require_same_shape(f, t, "registration_loss F/T");

    RegistrationLoss out;
    out.grad = Matrix(f.rows(), f.cols());
    const double* pf = f.data();
    const double* ps = s.data();
    const double* pt = t.data();
    double* pg = out.grad.data();
    double loss = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double ds = pf[i] - ps[i];
        const double dt = pf[i] - pt[i];
        loss += std::abs(ds) + alpha * std::abs(dt);
        pg[i] = sign0(ds) + alpha * sign0(dt);
    }
    out.loss = loss;
    return out;
}

RegistrationResult register_features(const Matrix& s, const Matrix& t,
                                     const RegistrationConfig& cfg) {
    require_same_shape(s, t, "register_features");
    validate(cfg);
    require_finite(s, "register_features source batch");
    require_finite(t, "register_features target batch");

    // The loss separates per element, so each element runs its own Adam
    // recurrence and halves its own step size once a step stops improving
    // its 1-D loss. A single shared step size would stall late-arriving
    // elements on the oscillation noise of already-converged ones.
    const std::size_t n = s.size();
    const double* ps = s.data();
    const double* pt = t.data();
    const double alpha = cfg.alpha;
    auto point_loss = [&](double x, std::size_t i) {
        return std::abs(x - ps[i]) + alpha * std::abs(x - pt[i]);
    };

    Matrix f(s.rows(), s.cols());
    for (std::size_t i = 0; i < n; ++i) f.data()[i] = pt[i] - ps[i];

    RegistrationResult res;
    res.registered = f;  // per-element best iterate
    std::vector<double> best(n), prev(n), lr(n, cfg.inner_lr), m(n, 0.0), v(n, 0.0);
    std::vector<char> frozen(n, 0);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        best[i] = prev[i] = point_loss(f.data()[i], i);
        total += best[i];
    }
    res.loss_history.reserve(cfg.inner_steps + 1);
    res.loss_history.push_back(total);

    const double tol_per_element = cfg.tolerance / static_cast<double>(n);
    const double lr_floor = cfg.inner_lr * 1e-12;
    const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    double* pf = f.data();
    double* pbest_x = res.registered.data();

    for (std::size_t step = 1; step <= cfg.inner_steps; ++step) {
        const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step));
        const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step));
        bool any_active = false;
        double current_total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (frozen[i]) {
                current_total += prev[i];
                continue;
            }
            any_active = true;
            const double g = sign0(pf[i] - ps[i]) + alpha * sign0(pf[i] - pt[i]);
            m[i] = beta1 * m[i] + (1.0 - beta1) * g;
            v[i] = beta2 * v[i] + (1.0 - beta2) * g * g;
            pf[i] -= lr[i] * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
            const double l = point_loss(pf[i], i);
            current_total += l;
            if (l < best[i]) {
                best[i] = l;
                pbest_x[i] = pf[i];
            }
            // Halve the step size when the step stalls against the
            // previous loss; an improving recovery after an overshoot
            // keeps its step size.
            if (!(l + tol_per_element < prev[i])) {
                lr[i] *= 0.5;
                if (lr[i] < lr_floor) frozen[i] = 1;
            }
            prev[i] = l;
        }
        if (!any_active) break;
        res.loss_history.push_back(current_total);
        res.steps_used = step;
    }

    res.final_loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) res.final_loss += best[i];
    return res;
}

}  // namespace dfr
