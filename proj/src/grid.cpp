#include "emca/grid.hpp"

#include <string>

namespace emca {

SpatialGrid SpatialGrid::from_matrix(const Matrix& m, std::size_t w, std::size_t h) {
    if (m.rows() != w * h) {
        throw ShapeError("grid of " + std::to_string(w) + "x" + std::to_string(h) +
                         " tokens cannot hold " + std::to_string(m.rows()) + " rows");
    }
    SpatialGrid g(w, h, m.cols());
    g.data = m.data();
    return g;
}

void PoolingSpec::validate(std::size_t w, std::size_t h) const {
    if (l_w == 0 || l_h == 0) {
        throw PoolingError("pooling window must be at least 1x1");
    }
    if (w % l_w != 0 || h % l_h != 0) {
        throw PoolingError("pooling window " + std::to_string(l_w) + "x" +
                           std::to_string(l_h) + " does not divide grid " +
                           std::to_string(w) + "x" + std::to_string(h));
    }
}

} // namespace emca
