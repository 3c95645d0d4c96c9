#pragma once

#include <cstddef>
#include <vector>

#include "emca/matrix.hpp"

namespace emca {

/// w x h grid of d-dimensional tokens. Token (p, q) lives at flat index
/// p*h + q with its d channels contiguous, so raster order walks q fastest.
struct SpatialGrid {
    std::size_t w = 0;
    std::size_t h = 0;
    std::size_t d = 0;
    std::vector<double> data;

    SpatialGrid() = default;
    SpatialGrid(std::size_t w_, std::size_t h_, std::size_t d_)
        : w(w_), h(h_), d(d_), data(w_ * h_ * d_, 0.0) {}

    std::size_t tokens() const { return w * h; }

    double* token(std::size_t p, std::size_t q) { return data.data() + (p * h + q) * d; }
    const double* token(std::size_t p, std::size_t q) const {
        return data.data() + (p * h + q) * d;
    }

    /// Tokens as a (w*h) x d matrix in raster order.
    Matrix as_matrix() const { return Matrix(w * h, d, data); }

    static SpatialGrid from_matrix(const Matrix& m, std::size_t w, std::size_t h);
};

/// Pooling window dimensions; valid for a grid when l_w | w and l_h | h.
struct PoolingSpec {
    std::size_t l_w = 1;
    std::size_t l_h = 1;

    std::size_t window() const { return l_w * l_h; }

    /// Throws PoolingError naming (w, h, l_w, l_h) on a divisibility violation.
    void validate(std::size_t w, std::size_t h) const;
};

} // namespace emca
