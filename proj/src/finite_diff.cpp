#include "dfr/finite_diff.hpp"

#include <cmath>
#include <string>

#include "dfr/errors.hpp"

namespace dfr {

double finite_diff_element(const std::function<double(const Matrix&)>& f, const Matrix& x,
                           std::size_t i, std::size_t j, double h) {
    if (h <= 0.0) throw ConfigError("finite_diff: h must be positive");
    Matrix probe = x;
    probe(i, j) = x(i, j) + h;
    const double fp = f(probe);
    probe(i, j) = x(i, j) - h;
    const double fm = f(probe);
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
        throw NumericError("finite_diff: non-finite evaluation at element (" + std::to_string(i) +
                           "," + std::to_string(j) + ")");
    }
    return (fp - fm) / (2.0 * h);
}

Matrix finite_diff_gradient(const std::function<double(const Matrix&)>& f, const Matrix& x,
                            double h) {
    Matrix grad(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j) grad(i, j) = finite_diff_element(f, x, i, j, h);
    return grad;
}

}  // namespace dfr
