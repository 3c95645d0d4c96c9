#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "emca/grid.hpp"
#include "emca/matrix.hpp"

namespace emca {

/// Raw memory tokens: per-frame spatial grids plus P object-pointer tokens.
/// Spatial tokens concatenate in frame order; pointers always come last and
/// are never pooled.
struct MemoryBank {
    std::vector<SpatialGrid> frames;
    Matrix pointers; // P x d_m

    void validate() const;
    std::size_t spatial_tokens() const;
    std::size_t token_dim() const;
    /// All spatial tokens as an n x d_m matrix, frames in order.
    Matrix spatial_matrix() const;
};

/// Memory tokens after key/value projection into the attention dimension d.
struct ProjectedBank {
    std::vector<SpatialGrid> key_frames;
    std::vector<SpatialGrid> value_frames;
    Matrix key_pointers;   // P x d
    Matrix value_pointers; // P x d

    void validate() const;
    std::size_t spatial_tokens() const;
    std::size_t dim() const;
    Matrix spatial_keys() const;
    Matrix spatial_values() const;
    /// [K_s; K_p] and [V_s; V_p] stacked full-size.
    Matrix full_keys() const;
    Matrix full_values() const;
};

/// Linear maps taking frame features (d_q) and memory tokens (d_m) into the
/// shared single-head attention dimension d.
struct AttentionProjections {
    Matrix w_q; // d_q x d
    Matrix w_k; // d_m x d
    Matrix w_v; // d_m x d
};

enum class VariantTag {
    Exact,
    EfficientRebalanced,
    KeyOffset,
    Linformer,
    LocalWindowed,
    Linear,
};

struct AttentionVariant {
    VariantTag tag = VariantTag::Exact;
    std::optional<PoolingSpec> pooling; // required for the three pooled tags
    std::size_t segments = 4;           // LocalWindowed only

    void validate() const;
};

std::string variant_name(VariantTag tag);
VariantTag variant_from_name(const std::string& name);

/// softmax(Q K^T / sqrt(d)) V, softmax applied row-wise.
Matrix cross_attention(const Matrix& q, const Matrix& k, const Matrix& v);

/// Window-average pooling: output token (i, j) is the mean of the l_w x l_h
/// input region it covers.
SpatialGrid pool_spatial_tokens(const SpatialGrid& grid, const PoolingSpec& spec);

/// Replicates each coarse token across its window, restoring original size.
SpatialGrid expand_surrogate(const SpatialGrid& pooled, const PoolingSpec& spec);

/// softmax([Q Kt^T/sqrt(d) + ln(l_w*l_h), Q Kp^T/sqrt(d)]) [Vt; Vp] where
/// Kt/Vt are the per-frame pooled spatial tokens. Equal to attending over
/// the full-size replicated surrogate (the rebalancing term accounts for
/// each coarse token standing in for l_w*l_h originals).
Matrix efficient_cross_attention(const Matrix& q, const ProjectedBank& bank,
                                 const PoolingSpec& spec);

/// Variant that folds the ln(l_w*l_h) scalar into the pooled key entries
/// element-wise instead of the logits.
Matrix key_offset_cross_attention(const Matrix& q, const ProjectedBank& bank,
                                  const PoolingSpec& spec);

/// Pooled attention without the rebalancing constant.
Matrix linformer_cross_attention(const Matrix& q, const ProjectedBank& bank,
                                 const PoolingSpec& spec);

/// Block-diagonal attention: query block i attends only within key/value
/// block i; blocks are contiguous equal splits.
Matrix local_windowed_cross_attention(const Matrix& q, const Matrix& k,
                                      const Matrix& v, std::size_t segments);

/// Associativity-based linear attention with feature map
/// phi(x) = max(x, 0) + 1e-6: diag(phi(Q) phi(K)^T 1)^-1 phi(Q) (phi(K)^T V).
Matrix linear_cross_attention(const Matrix& q, const Matrix& k, const Matrix& v);

struct ProjectionResult {
    Matrix q;
    ProjectedBank bank;
};

/// Q = X w_q; spatial and pointer tokens mapped by w_k / w_v, grid layout
/// and frame order preserved.
ProjectionResult project(const Matrix& x, const MemoryBank& bank,
                         const AttentionProjections& proj);

/// Dispatches a projected instance through the kernel the variant names.
Matrix apply_variant(const Matrix& q, const ProjectedBank& bank,
                     const AttentionVariant& variant);

} // namespace emca
