#pragma once

#include <cstdint>

#include "emca/grid.hpp"

namespace emca {

/// Controls for the smooth token generator. `bandwidth` is the number of
/// cosine modes per channel; mode m carries spatial frequency
/// m / max(w, h) cycles per token, so bandwidth 1 is a constant (DC) field
/// and larger bandwidths are progressively less smooth. When c_target > 0
/// the generated grid is rescaled so its measured locality equals c_target.
struct SmoothnessSpec {
    double c_target = 0.0;
    std::size_t bandwidth = 4;
    double amplitude = 1.0;
    std::uint64_t seed = 0;
};

enum class Adjacency {
    Raster,       // consecutive tokens in flat order, matching 1-D indexing
    FourNeighbor, // horizontal and vertical grid neighbors
};

/// Sum-of-cosine-modes field per channel with seeded random directions and
/// phases. Deterministic given the spec.
SpatialGrid gen_smooth_grid(std::size_t w, std::size_t h, std::size_t d,
                            const SmoothnessSpec& spec);

/// i.i.d. uniform [-1, 1] tokens; the non-smooth baseline.
SpatialGrid gen_random_grid(std::size_t w, std::size_t h, std::size_t d,
                            std::uint64_t seed);

/// Smallest constant c such that ||k_i - k_{i+1}||^2 <= c / n^2 holds for
/// every adjacent token pair: n^2 times the max adjacent squared distance.
double measure_locality(const SpatialGrid& grid, Adjacency adjacency = Adjacency::Raster);

} // namespace emca
