#pragma once

// Test-side construction helpers and independent scalar oracles. The oracles
// deliberately avoid the library's matmul/softmax paths.

#include <cmath>
#include <cstdint>
#include <vector>

#include "emca/attention.hpp"
#include "emca/rng.hpp"
#include "emca/synthetic.hpp"

namespace emca::test {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(lo, hi);
    return m;
}

inline SpatialGrid random_grid(std::size_t w, std::size_t h, std::size_t d,
                               std::uint64_t seed) {
    return gen_random_grid(w, h, d, seed);
}

// Random bank already in the attention dimension.
inline ProjectedBank make_bank(std::size_t frames, std::size_t w, std::size_t h,
                               std::size_t d, std::size_t pointers, std::uint64_t seed) {
    ProjectedBank bank;
    for (std::size_t f = 0; f < frames; ++f) {
        bank.key_frames.push_back(random_grid(w, h, d, seed * 100 + 2 * f));
        bank.value_frames.push_back(random_grid(w, h, d, seed * 100 + 2 * f + 1));
    }
    bank.key_pointers = random_matrix(pointers, d, seed * 100 + 71);
    bank.value_pointers = random_matrix(pointers, d, seed * 100 + 72);
    return bank;
}

inline ProjectedBank make_smooth_bank(std::size_t frames, std::size_t w, std::size_t h,
                                      std::size_t d, std::size_t pointers,
                                      std::size_t bandwidth, std::uint64_t seed) {
    ProjectedBank bank;
    for (std::size_t f = 0; f < frames; ++f) {
        bank.key_frames.push_back(
            gen_smooth_grid(w, h, d, SmoothnessSpec{0.0, bandwidth, 1.0, seed * 100 + 2 * f}));
        bank.value_frames.push_back(gen_smooth_grid(
            w, h, d, SmoothnessSpec{0.0, bandwidth, 1.0, seed * 100 + 2 * f + 1}));
    }
    bank.key_pointers = random_matrix(pointers, d, seed * 100 + 71);
    bank.value_pointers = random_matrix(pointers, d, seed * 100 + 72);
    return bank;
}

// Scalar triple-loop attention, softmax written out directly.
inline Matrix naive_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
    const std::size_t L = q.rows(), m = k.rows(), d = q.cols();
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    Matrix out(L, v.cols());
    for (std::size_t i = 0; i < L; ++i) {
        std::vector<double> logits(m, 0.0);
        double mx = -1e300;
        for (std::size_t j = 0; j < m; ++j) {
            double dot = 0.0;
            for (std::size_t c = 0; c < d; ++c) dot += q.at(i, c) * k.at(j, c);
            logits[j] = dot * scale;
            if (logits[j] > mx) mx = logits[j];
        }
        double denom = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            logits[j] = std::exp(logits[j] - mx);
            denom += logits[j];
        }
        for (std::size_t c = 0; c < v.cols(); ++c) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += logits[j] * v.at(j, c);
            out.at(i, c) = acc / denom;
        }
    }
    return out;
}

// Block means computed with explicit index arithmetic.
inline SpatialGrid naive_pool(const SpatialGrid& g, const PoolingSpec& spec) {
    SpatialGrid out(g.w / spec.l_w, g.h / spec.l_h, g.d);
    for (std::size_t i = 0; i < out.w; ++i) {
        for (std::size_t j = 0; j < out.h; ++j) {
            for (std::size_t c = 0; c < g.d; ++c) {
                double acc = 0.0;
                for (std::size_t p = 0; p < spec.l_w; ++p) {
                    for (std::size_t q = 0; q < spec.l_h; ++q) {
                        acc += g.token(i * spec.l_w + p, j * spec.l_h + q)[c];
                    }
                }
                out.token(i, j)[c] = acc / static_cast<double>(spec.window());
            }
        }
    }
    return out;
}

// Exact attention over the full-size replicated surrogate tokens: the
// reference side of the pooled-equivalence identity, built entirely from
// pooling + replication + the scalar attention oracle.
inline Matrix surrogate_reference(const Matrix& q, const ProjectedBank& bank,
                                  const PoolingSpec& spec) {
    Matrix keys, values;
    for (std::size_t f = 0; f < bank.key_frames.size(); ++f) {
        keys = concat_rows(
            keys, expand_surrogate(naive_pool(bank.key_frames[f], spec), spec).as_matrix());
        values = concat_rows(
            values,
            expand_surrogate(naive_pool(bank.value_frames[f], spec), spec).as_matrix());
    }
    keys = concat_rows(keys, bank.key_pointers);
    values = concat_rows(values, bank.value_pointers);
    return naive_attention(q, keys, values);
}

} // namespace emca::test
