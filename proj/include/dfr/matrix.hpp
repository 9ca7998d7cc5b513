#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dfr {

// Dense row-major matrix of doubles. The universal carrier for feature
// batches, network parameters and gradients.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    double* row(std::size_t i) { return data_.data() + i * cols_; }
    const double* row(std::size_t i) const { return data_.data() + i * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    std::vector<double>& values() { return data_; }
    const std::vector<double>& values() const { return data_; }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

    void fill(double v) { data_.assign(data_.size(), v); }

    Matrix select_rows(const std::vector<std::size_t>& indices) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_nt(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_tn(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

void add_inplace(Matrix& a, const Matrix& b);
void axpy_inplace(Matrix& a, double alpha, const Matrix& b);  // a += alpha * b
void scale_inplace(Matrix& a, double alpha);

// Throws ConfigError unless the two shapes match.
void require_same_shape(const Matrix& a, const Matrix& b, const std::string& what);
// Throws NumericError if any element is NaN or infinite.
void require_finite(const Matrix& a, const std::string& what);
bool all_finite(const Matrix& a);

}  // namespace dfr
