#include "emca/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "emca/errors.hpp"
#include "emca/rng.hpp"

namespace emca {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

double sq_dist(const double* a, const double* b, std::size_t d) {
    double acc = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
        const double diff = a[c] - b[c];
        acc += diff * diff;
    }
    return acc;
}

} // namespace

SpatialGrid gen_smooth_grid(std::size_t w, std::size_t h, std::size_t d,
                            const SmoothnessSpec& spec) {
    if (spec.bandwidth == 0) {
        throw NumericError("bandwidth must be at least 1");
    }
    if (spec.amplitude <= 0.0) {
        throw NumericError("amplitude must be positive");
    }
    Rng rng(spec.seed);
    SpatialGrid grid(w, h, d);
    const double base_freq = 1.0 / static_cast<double>(std::max(w, h));
    const double mode_amp =
        spec.amplitude / std::sqrt(static_cast<double>(spec.bandwidth));
    for (std::size_t c = 0; c < d; ++c) {
        for (std::size_t m = 0; m < spec.bandwidth; ++m) {
            const double theta = rng.uniform(0.0, kTwoPi);
            const double phase = rng.uniform(0.0, kTwoPi);
            // Mode m has |frequency| = m * base_freq; mode 0 is DC.
            const double fx = static_cast<double>(m) * base_freq * std::cos(theta);
            const double fy = static_cast<double>(m) * base_freq * std::sin(theta);
            for (std::size_t p = 0; p < w; ++p) {
                for (std::size_t q = 0; q < h; ++q) {
                    grid.token(p, q)[c] +=
                        mode_amp *
                        std::cos(kTwoPi * (fx * static_cast<double>(p) +
                                           fy * static_cast<double>(q)) +
                                 phase);
                }
            }
        }
    }
    if (spec.c_target > 0.0 && grid.tokens() >= 2) {
        const double measured = measure_locality(grid);
        if (measured > 0.0) {
            const double factor = std::sqrt(spec.c_target / measured);
            for (double& x : grid.data) x *= factor;
        }
    }
    return grid;
}

SpatialGrid gen_random_grid(std::size_t w, std::size_t h, std::size_t d,
                            std::uint64_t seed) {
    Rng rng(seed);
    SpatialGrid grid(w, h, d);
    for (double& x : grid.data) x = rng.uniform(-1.0, 1.0);
    return grid;
}

double measure_locality(const SpatialGrid& grid, Adjacency adjacency) {
    const std::size_t n = grid.tokens();
    if (n < 2) {
        throw LocalityError("locality undefined for grids with fewer than 2 tokens");
    }
    double worst = 0.0;
    if (adjacency == Adjacency::Raster) {
        const double* flat = grid.data.data();
        for (std::size_t i = 0; i + 1 < n; ++i) {
            worst = std::max(worst, sq_dist(flat + i * grid.d, flat + (i + 1) * grid.d,
                                            grid.d));
        }
    } else {
        for (std::size_t p = 0; p < grid.w; ++p) {
            for (std::size_t q = 0; q < grid.h; ++q) {
                if (q + 1 < grid.h) {
                    worst = std::max(
                        worst, sq_dist(grid.token(p, q), grid.token(p, q + 1), grid.d));
                }
                if (p + 1 < grid.w) {
                    worst = std::max(
                        worst, sq_dist(grid.token(p, q), grid.token(p + 1, q), grid.d));
                }
            }
        }
    }
    return static_cast<double>(n) * static_cast<double>(n) * worst;
}

} // namespace emca
