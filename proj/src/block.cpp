#include "emca/block.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "emca/rng.hpp"

namespace emca {

namespace {

constexpr double kNormEps = 1e-5;

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(-0.05, 0.05);
    return m;
}

Matrix relu(const Matrix& m) {
    Matrix out = m;
    for (double& x : out.data()) x = std::max(x, 0.0);
    return out;
}

Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("residual add shape mismatch");
    }
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

} // namespace

NormParams NormParams::identity(std::size_t dim) {
    NormParams n;
    n.scale.assign(dim, 1.0);
    n.bias.assign(dim, 0.0);
    return n;
}

void BlockParams::validate() const {
    const std::size_t d_q = self_proj.w_q.rows();
    if (self_proj.w_k.rows() != d_q || self_proj.w_v.rows() != d_q ||
        cross_proj.w_q.rows() != d_q) {
        throw ShapeError("self-attention projections must consume the feature dim");
    }
    if (self_out.cols() != d_q || cross_out.cols() != d_q || mlp_in.rows() != d_q ||
        mlp_out.cols() != d_q) {
        throw ShapeError("block outputs must return to the feature dim");
    }
    if (self_out.rows() != self_proj.w_v.cols() || cross_out.rows() != cross_proj.w_v.cols()) {
        throw ShapeError("output projections must consume the attention dim");
    }
    if (mlp_in.cols() != mlp_out.rows()) {
        throw ShapeError("mlp hidden dims disagree");
    }
    if (mlp_in.cols() < d_q) {
        throw ShapeError("mlp hidden dim must be at least the feature dim");
    }
    if (norm_self.scale.size() != d_q || norm_cross.scale.size() != d_q ||
        norm_mlp.scale.size() != d_q) {
        throw ShapeError("norm parameter width must match the feature dim");
    }
    for (const NormParams* n : {&norm_self, &norm_cross, &norm_mlp}) {
        if (n->bias.size() != n->scale.size()) {
            throw ShapeError("norm scale/bias widths differ");
        }
        for (double v : n->scale) {
            if (!std::isfinite(v)) throw NumericError("non-finite norm scale");
        }
        for (double v : n->bias) {
            if (!std::isfinite(v)) throw NumericError("non-finite norm bias");
        }
    }
}

Matrix layer_norm(const Matrix& x, const NormParams& norm) {
    if (norm.scale.size() != x.cols()) {
        throw ShapeError("layer_norm width " + std::to_string(norm.scale.size()) +
                         " vs feature dim " + std::to_string(x.cols()));
    }
    Matrix out(x.rows(), x.cols());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const double* in_row = x.row(i);
        double* out_row = out.row(i);
        double mean = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) mean += in_row[j];
        mean /= static_cast<double>(x.cols());
        double var = 0.0;
        for (std::size_t j = 0; j < x.cols(); ++j) {
            const double c = in_row[j] - mean;
            var += c * c;
        }
        var /= static_cast<double>(x.cols());
        const double inv = 1.0 / std::sqrt(var + kNormEps);
        for (std::size_t j = 0; j < x.cols(); ++j) {
            out_row[j] = (in_row[j] - mean) * inv * norm.scale[j] + norm.bias[j];
        }
    }
    return out;
}

FrameFeatures memory_attention_block(const FrameFeatures& x, const MemoryBank& bank,
                                     const BlockParams& params,
                                     const AttentionVariant& variant) {
    params.validate();
    variant.validate();

    // Self-attention: queries, keys, values all from the normalized input.
    const Matrix normed = layer_norm(x.tokens, params.norm_self);
    const Matrix self_attn = cross_attention(matmul(normed, params.self_proj.w_q),
                                             matmul(normed, params.self_proj.w_k),
                                             matmul(normed, params.self_proj.w_v));
    const Matrix x1 = add(x.tokens, matmul(self_attn, params.self_out));

    // Memory cross-attention with the requested variant.
    const ProjectionResult projected =
        project(layer_norm(x1, params.norm_cross), bank, params.cross_proj);
    const Matrix cross = apply_variant(projected.q, projected.bank, variant);
    const Matrix x2 = add(x1, matmul(cross, params.cross_out));

    // MLP.
    const Matrix hidden = relu(matmul(layer_norm(x2, params.norm_mlp), params.mlp_in));
    return FrameFeatures{add(x2, matmul(hidden, params.mlp_out))};
}

FrameFeatures memory_attention_stack(const FrameFeatures& x, const MemoryBank& bank,
                                     const std::vector<BlockParams>& blocks,
                                     const AttentionVariant& variant) {
    FrameFeatures current = x;
    for (const auto& block : blocks) {
        current = memory_attention_block(current, bank, block, variant);
    }
    return current;
}

BlockParams random_block_params(std::size_t d_q, std::size_t d_m, std::size_t d,
                                std::size_t d_ff, std::uint64_t seed) {
    Rng rng(seed);
    BlockParams p;
    p.self_proj.w_q = random_matrix(d_q, d, rng);
    p.self_proj.w_k = random_matrix(d_q, d, rng);
    p.self_proj.w_v = random_matrix(d_q, d, rng);
    p.self_out = random_matrix(d, d_q, rng);
    p.cross_proj.w_q = random_matrix(d_q, d, rng);
    p.cross_proj.w_k = random_matrix(d_m, d, rng);
    p.cross_proj.w_v = random_matrix(d_m, d, rng);
    p.cross_out = random_matrix(d, d_q, rng);
    p.mlp_in = random_matrix(d_q, d_ff, rng);
    p.mlp_out = random_matrix(d_ff, d_q, rng);
    p.norm_self = NormParams::identity(d_q);
    p.norm_cross = NormParams::identity(d_q);
    p.norm_mlp = NormParams::identity(d_q);
    return p;
}

} // namespace emca
