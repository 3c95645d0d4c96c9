#include "emca/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdlib>
#include <string>
#include <thread>

namespace emca {

namespace {

std::string shape_str(std::size_t r, std::size_t c) {
    return std::to_string(r) + "x" + std::to_string(c);
}

// Splits [0, n) row ranges across threads. Each output row is written by
// exactly one thread, so results match the sequential path bit for bit.
template <typename Fn>
void parallel_rows(std::size_t n, Fn&& fn) {
    const unsigned nt = thread_count();
    if (nt <= 1 || n < 2 * nt) {
        fn(std::size_t{0}, n);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(nt);
    const std::size_t chunk = (n + nt - 1) / nt;
    for (unsigned t = 0; t < nt; ++t) {
        const std::size_t begin = std::min(n, t * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        if (begin == end) break;
        workers.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& w : workers) w.join();
}

} // namespace

unsigned thread_count() {
    static const unsigned n = [] {
        const char* env = std::getenv("EMCA_THREADS");
        if (!env) return 1u;
        const long v = std::strtol(env, nullptr, 10);
        return v > 1 ? static_cast<unsigned>(v) : 1u;
    }();
    return n;
}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
        throw ShapeError("matrix data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape_str(rows_, cols_));
    }
}

bool Matrix::all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul shape mismatch: " + shape_str(a.rows(), a.cols()) +
                         " x " + shape_str(b.rows(), b.cols()));
    }
    Matrix out(a.rows(), b.cols());
    // ikj order: the accumulation into each out(i, j) runs over ascending k,
    // identical to a plain dot product, and the j loop vectorizes.
    parallel_rows(a.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* out_row = out.row(i);
            for (std::size_t k = 0; k < a.cols(); ++k) {
                const double aik = a.at(i, k);
                const double* b_row = b.row(k);
                for (std::size_t j = 0; j < b.cols(); ++j) {
                    out_row[j] += aik * b_row[j];
                }
            }
        }
    });
    return out;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw ShapeError("matmul_nt shape mismatch: " + shape_str(a.rows(), a.cols()) +
                         " x " + shape_str(b.rows(), b.cols()) + "^T");
    }
    Matrix out(a.rows(), b.rows());
    parallel_rows(a.rows(), [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double* a_row = a.row(i);
            for (std::size_t j = 0; j < b.rows(); ++j) {
                const double* b_row = b.row(j);
                double acc = 0.0;
                for (std::size_t k = 0; k < a.cols(); ++k) {
                    acc += a_row[k] * b_row[k];
                }
                out.at(i, j) = acc;
            }
        }
    });
    return out;
}

Matrix transpose(const Matrix& m) {
    Matrix out(m.cols(), m.rows());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out.at(j, i) = m.at(i, j);
        }
    }
    return out;
}

Matrix row_softmax(const Matrix& m) {
    if (m.cols() == 0) {
        throw ShapeError("row_softmax requires at least one column");
    }
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        const double* in_row = m.row(i);
        double* out_row = out.row(i);
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (std::isnan(in_row[j])) {
                throw NumericError("row_softmax: NaN in row " + std::to_string(i));
            }
            mx = std::max(mx, in_row[j]);
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out_row[j] = std::exp(in_row[j] - mx);
            sum += out_row[j];
        }
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out_row[j] /= sum;
        }
    }
    return out;
}

double frobenius_norm(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data()) acc += v * v;
    return std::sqrt(acc);
}

double relative_frobenius_error(const Matrix& approx, const Matrix& exact) {
    if (!approx.same_shape(exact)) {
        throw ShapeError("relative_frobenius_error shape mismatch: " +
                         shape_str(approx.rows(), approx.cols()) + " vs " +
                         shape_str(exact.rows(), exact.cols()));
    }
    double diff = 0.0;
    for (std::size_t i = 0; i < approx.size(); ++i) {
        const double e = approx.data()[i] - exact.data()[i];
        diff += e * e;
    }
    const double denom = frobenius_norm(exact);
    if (denom == 0.0) return diff == 0.0 ? 0.0 : std::sqrt(diff);
    return std::sqrt(diff) / denom;
}

double max_row_relative_error(const Matrix& approx, const Matrix& exact) {
    if (!approx.same_shape(exact)) {
        throw ShapeError("max_row_relative_error shape mismatch: " +
                         shape_str(approx.rows(), approx.cols()) + " vs " +
                         shape_str(exact.rows(), exact.cols()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < exact.rows(); ++i) {
        double diff = 0.0, norm = 0.0;
        for (std::size_t j = 0; j < exact.cols(); ++j) {
            const double e = approx.at(i, j) - exact.at(i, j);
            diff += e * e;
            norm += exact.at(i, j) * exact.at(i, j);
        }
        const double rel = norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
        worst = std::max(worst, rel);
    }
    return worst;
}

Matrix concat_rows(const Matrix& a, const Matrix& b) {
    if (a.rows() == 0) return b;
    if (b.rows() == 0) return a;
    if (a.cols() != b.cols()) {
        throw ShapeError("concat_rows column mismatch: " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
    }
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(), out.data().begin() + a.size());
    return out;
}

Matrix concat_cols(const Matrix& a, const Matrix& b) {
    if (a.cols() == 0 && a.rows() == 0) return b;
    if (b.cols() == 0 && b.rows() == 0) return a;
    if (a.rows() != b.rows()) {
        throw ShapeError("concat_cols row mismatch: " + shape_str(a.rows(), a.cols()) +
                         " vs " + shape_str(b.rows(), b.cols()));
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        std::copy(a.row(i), a.row(i) + a.cols(), out.row(i));
        std::copy(b.row(i), b.row(i) + b.cols(), out.row(i) + a.cols());
    }
    return out;
}

Matrix slice_rows(const Matrix& m, std::size_t begin, std::size_t count) {
    if (begin + count > m.rows()) {
        throw ShapeError("slice_rows out of range: [" + std::to_string(begin) + ", " +
                         std::to_string(begin + count) + ") of " +
                         std::to_string(m.rows()) + " rows");
    }
    Matrix out(count, m.cols());
    std::copy(m.row(begin), m.row(begin) + count * m.cols(), out.data().begin());
    return out;
}

} // namespace emca
