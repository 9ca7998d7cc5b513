#include "dfr/matrix.hpp"

#include <cmath>

#include "dfr/errors.hpp"

namespace dfr {

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return Matrix();
    Matrix m(rows.size(), rows[0].size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != m.cols()) {
            throw ConfigError("from_rows: ragged row " + std::to_string(i));
        }
        for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
    }
    return m;
}

Matrix Matrix::select_rows(const std::vector<std::size_t>& indices) const {
    Matrix out(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i) {
        const double* src = row(indices[i]);
        double* dst = out.row(i);
        for (std::size_t j = 0; j < cols_; ++j) dst[j] = src[j];
    }
    return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ConfigError("matmul: inner dimensions disagree (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.rows()) + ")");
    }
    Matrix c(a.rows(), b.cols());
    const std::size_t n = a.rows(), k_dim = a.cols(), m = b.cols();
    // Row-parallel: each output row is produced by one thread in serial
    // order, so results are bit-identical at any thread count.
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t k = 0; k < k_dim; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < m; ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ConfigError("matmul_nt: inner dimensions disagree (" + std::to_string(a.cols()) +
                          " vs " + std::to_string(b.cols()) + ")");
    }
    Matrix c(a.rows(), b.rows());
    const std::size_t n = a.rows(), k_dim = a.cols(), m = b.rows();
#pragma omp parallel for schedule(static)
    for (long long ii = 0; ii < static_cast<long long>(n); ++ii) {
        const auto i = static_cast<std::size_t>(ii);
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < m; ++j) {
            const double* brow = b.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < k_dim; ++k) acc += arow[k] * brow[k];
            crow[j] = acc;
        }
    }
    return c;
}

Matrix matmul_tn(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw ConfigError("matmul_tn: inner dimensions disagree (" + std::to_string(a.rows()) +
                          " vs " + std::to_string(b.rows()) + ")");
    }
    Matrix c(a.cols(), b.cols());
    const std::size_t n = a.rows(), rows_out = a.cols(), m = b.cols();
    // Parallel over output rows (columns of a); the i-loop stays serial per row.
#pragma omp parallel for schedule(static)
    for (long long jj = 0; jj < static_cast<long long>(rows_out); ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        double* crow = c.row(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double aij = a(i, j);
            if (aij == 0.0) continue;
            const double* brow = b.row(i);
            for (std::size_t k = 0; k < m; ++k) crow[k] += aij * brow[k];
        }
    }
    return c;
}

Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

void add_inplace(Matrix& a, const Matrix& b) {
    require_same_shape(a, b, "add");
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += pb[i];
}

void axpy_inplace(Matrix& a, double alpha, const Matrix& b) {
    require_same_shape(a, b, "axpy");
    double* pa = a.data();
    const double* pb = b.data();
    for (std::size_t i = 0; i < a.size(); ++i) pa[i] += alpha * pb[i];
}

void scale_inplace(Matrix& a, double alpha) {
    for (double& v : a.values()) v *= alpha;
}

void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what) {
    if (!a.same_shape(b)) {
        throw ConfigError(what + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                          std::to_string(b.cols()) + ")");
    }
}

bool all_finite(const Matrix& a) {
    for (double v : a.values())
        if (!std::isfinite(v)) return false;
    return true;
}

void require_finite(const Matrix& a, const std::string& what) {
    if (!all_finite(a)) throw NumericError(what + ": non-finite element");
}

}  // namespace dfr
