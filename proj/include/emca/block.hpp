#pragma once

#include <cstddef>
#include <vector>

#include "emca/attention.hpp"
#include "emca/matrix.hpp"

namespace emca {

/// Per-channel standardization parameters (scale, bias), epsilon 1e-5.
struct NormParams {
    std::vector<double> scale;
    std::vector<double> bias;

    static NormParams identity(std::size_t dim);
};

/// Parameters of one memory-attention block: pre-norm self-attention,
/// pre-norm memory cross-attention, pre-norm MLP, each with a residual.
struct BlockParams {
    AttentionProjections self_proj;  // d_q -> d, keys/values also from x
    Matrix self_out;                 // d x d_q
    AttentionProjections cross_proj; // queries d_q -> d, memory d_m -> d
    Matrix cross_out;                // d x d_q
    Matrix mlp_in;                   // d_q x d_ff
    Matrix mlp_out;                  // d_ff x d_q
    NormParams norm_self;
    NormParams norm_cross;
    NormParams norm_mlp;

    void validate() const;
};

/// Current-frame features: L tokens of width d_q.
struct FrameFeatures {
    Matrix tokens; // L x d_q
};

Matrix layer_norm(const Matrix& x, const NormParams& norm);

/// x1 = x + SelfAttn(Norm(x)); x2 = x1 + CrossAttn_variant(Norm(x1), bank);
/// out = x2 + MLP(Norm(x2)). Output shape equals input shape.
FrameFeatures memory_attention_block(const FrameFeatures& x, const MemoryBank& bank,
                                     const BlockParams& params,
                                     const AttentionVariant& variant);

/// Sequential application of memory_attention_block; an empty block list
/// returns x unchanged.
FrameFeatures memory_attention_stack(const FrameFeatures& x, const MemoryBank& bank,
                                     const std::vector<BlockParams>& blocks,
                                     const AttentionVariant& variant);

/// Seeded uniform [-0.05, 0.05] parameters with identity norms, for
/// reproducible tests without training.
BlockParams random_block_params(std::size_t d_q, std::size_t d_m, std::size_t d,
                                std::size_t d_ff, std::uint64_t seed);

} // namespace emca
