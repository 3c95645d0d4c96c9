#pragma once

#include <stdexcept>
#include <string>

namespace emca {

// Shape mismatch between matrices or grids.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Pooling window does not divide the grid.
struct PoolingError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// NaN encountered where a finite value is required.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Token count not divisible by the segment count.
struct SegmentationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Attention over an empty key/value set.
struct EmptyMemoryError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Linear-attention normalizer vanished for some query row.
struct DegenerateQueryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Locality is undefined for grids with fewer than two tokens.
struct LocalityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// File read/write failure.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace emca
