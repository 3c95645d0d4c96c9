#pragma once

#include <cstddef>
#include <vector>

#include "emca/errors.hpp"

namespace emca {

/// Dense row-major matrix of 64-bit floats. The universal carrier for
/// queries, keys, values, attention weights, and block activations.
class Matrix {
public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool all_finite() const;

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    bool operator==(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && data_ == other.data_;
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// a * b. Accumulation order per output element is fixed (ascending inner
/// index), so repeated calls are bit-identical. Row-parallel when
/// EMCA_THREADS > 1; the per-element reduction order does not change.
Matrix matmul(const Matrix& a, const Matrix& b);

/// a * b^T. Same determinism contract as matmul.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& m);

/// Row-wise softmax with per-row max subtraction. Throws NumericError on NaN.
Matrix row_softmax(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// ||approx - exact||_F / ||exact||_F; 0 when both are zero matrices.
double relative_frobenius_error(const Matrix& approx, const Matrix& exact);

/// max over rows of ||approx_i - exact_i|| / ||exact_i||; rows with zero
/// exact norm contribute the absolute difference norm instead.
double max_row_relative_error(const Matrix& approx, const Matrix& exact);

/// Vertical concatenation [a; b].
Matrix concat_rows(const Matrix& a, const Matrix& b);

/// Horizontal concatenation [a, b].
Matrix concat_cols(const Matrix& a, const Matrix& b);

/// Contiguous row slice [begin, begin+count).
Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t count);

/// Thread count from EMCA_THREADS (>= 1), read once per process.
unsigned thread_count();

} // namespace emca
