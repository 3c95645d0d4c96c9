#include "emca/attention.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace emca {

namespace {

void check_frames_uniform(const std::vector<SpatialGrid>& frames, const char* what) {
    if (frames.empty()) return;
    const auto& first = frames.front();
    for (const auto& f : frames) {
        if (f.w != first.w || f.h != first.h || f.d != first.d) {
            throw ShapeError(std::string(what) + ": frame grids must share (w, h, d)");
        }
    }
}

// Pools every frame and stacks the coarse tokens in frame order.
std::pair<Matrix, Matrix> pooled_spatial_kv(const ProjectedBank& bank,
                                            const PoolingSpec& spec) {
    Matrix keys, values;
    for (std::size_t f = 0; f < bank.key_frames.size(); ++f) {
        keys = concat_rows(keys, pool_spatial_tokens(bank.key_frames[f], spec).as_matrix());
        values =
            concat_rows(values, pool_spatial_tokens(bank.value_frames[f], spec).as_matrix());
    }
    return {std::move(keys), std::move(values)};
}

void check_bank_dim(const Matrix& q, const ProjectedBank& bank) {
    bank.validate();
    if (bank.dim() != q.cols()) {
        throw ShapeError("query dim " + std::to_string(q.cols()) +
                         " does not match bank dim " + std::to_string(bank.dim()));
    }
}

} // namespace

void MemoryBank::validate() const {
    check_frames_uniform(frames, "MemoryBank");
    if (spatial_tokens() == 0) {
        throw EmptyMemoryError("memory bank has no spatial tokens");
    }
    if (pointers.rows() > 0 && !frames.empty() && pointers.cols() != frames.front().d) {
        throw ShapeError("pointer dim " + std::to_string(pointers.cols()) +
                         " does not match spatial dim " + std::to_string(frames.front().d));
    }
}

std::size_t MemoryBank::spatial_tokens() const {
    std::size_t n = 0;
    for (const auto& f : frames) n += f.tokens();
    return n;
}

std::size_t MemoryBank::token_dim() const {
    if (!frames.empty()) return frames.front().d;
    return pointers.cols();
}

Matrix MemoryBank::spatial_matrix() const {
    Matrix out;
    for (const auto& f : frames) out = concat_rows(out, f.as_matrix());
    return out;
}

void ProjectedBank::validate() const {
    check_frames_uniform(key_frames, "ProjectedBank keys");
    check_frames_uniform(value_frames, "ProjectedBank values");
    if (key_frames.size() != value_frames.size()) {
        throw ShapeError("key/value frame counts differ");
    }
    for (std::size_t f = 0; f < key_frames.size(); ++f) {
        const auto& k = key_frames[f];
        const auto& v = value_frames[f];
        if (k.w != v.w || k.h != v.h || k.d != v.d) {
            throw ShapeError("key/value frame shapes differ at frame " + std::to_string(f));
        }
    }
    if (key_pointers.rows() != value_pointers.rows()) {
        throw ShapeError("key/value pointer counts differ");
    }
    if (spatial_tokens() == 0 && key_pointers.rows() == 0) {
        throw EmptyMemoryError("projected bank is empty");
    }
}

std::size_t ProjectedBank::spatial_tokens() const {
    std::size_t n = 0;
    for (const auto& f : key_frames) n += f.tokens();
    return n;
}

std::size_t ProjectedBank::dim() const {
    if (!key_frames.empty()) return key_frames.front().d;
    return key_pointers.cols();
}

Matrix ProjectedBank::spatial_keys() const {
    Matrix out;
    for (const auto& f : key_frames) out = concat_rows(out, f.as_matrix());
    return out;
}

Matrix ProjectedBank::spatial_values() const {
    Matrix out;
    for (const auto& f : value_frames) out = concat_rows(out, f.as_matrix());
    return out;
}

Matrix ProjectedBank::full_keys() const { return concat_rows(spatial_keys(), key_pointers); }

Matrix ProjectedBank::full_values() const {
    return concat_rows(spatial_values(), value_pointers);
}

void AttentionVariant::validate() const {
    const bool pooled = tag == VariantTag::EfficientRebalanced ||
                        tag == VariantTag::KeyOffset || tag == VariantTag::Linformer;
    if (pooled && !pooling) {
        throw PoolingError("variant " + variant_name(tag) + " requires a pooling spec");
    }
    if (!pooled && pooling) {
        throw PoolingError("variant " + variant_name(tag) + " does not take a pooling spec");
    }
    if (tag == VariantTag::LocalWindowed && segments == 0) {
        throw SegmentationError("segment count must be at least 1");
    }
}

std::string variant_name(VariantTag tag) {
    switch (tag) {
    case VariantTag::Exact: return "exact";
    case VariantTag::EfficientRebalanced: return "efficient";
    case VariantTag::KeyOffset: return "keyoffset";
    case VariantTag::Linformer: return "linformer";
    case VariantTag::LocalWindowed: return "localwindow";
    case VariantTag::Linear: return "linear";
    }
    return "unknown";
}

VariantTag variant_from_name(const std::string& name) {
    if (name == "exact") return VariantTag::Exact;
    if (name == "efficient") return VariantTag::EfficientRebalanced;
    if (name == "keyoffset") return VariantTag::KeyOffset;
    if (name == "linformer") return VariantTag::Linformer;
    if (name == "localwindow") return VariantTag::LocalWindowed;
    if (name == "linear") return VariantTag::Linear;
    throw ShapeError("unknown attention variant: " + name);
}

Matrix cross_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
    if (k.rows() == 0) {
        throw EmptyMemoryError("cross_attention over zero keys");
    }
    if (q.cols() != k.cols() || q.cols() != v.cols() || k.rows() != v.rows()) {
        throw ShapeError("cross_attention shapes: q " + std::to_string(q.rows()) + "x" +
                         std::to_string(q.cols()) + ", k " + std::to_string(k.rows()) + "x" +
                         std::to_string(k.cols()) + ", v " + std::to_string(v.rows()) + "x" +
                         std::to_string(v.cols()));
    }
    Matrix logits = matmul_nt(q, k);
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    for (double& x : logits.data()) x *= scale;
    return matmul(row_softmax(logits), v);
}

SpatialGrid pool_spatial_tokens(const SpatialGrid& grid, const PoolingSpec& spec) {
    spec.validate(grid.w, grid.h);
    SpatialGrid out(grid.w / spec.l_w, grid.h / spec.l_h, grid.d);
    const double inv = 1.0 / static_cast<double>(spec.window());
    for (std::size_t i = 0; i < out.w; ++i) {
        for (std::size_t j = 0; j < out.h; ++j) {
            double* dst = out.token(i, j);
            for (std::size_t p = i * spec.l_w; p < (i + 1) * spec.l_w; ++p) {
                for (std::size_t q = j * spec.l_h; q < (j + 1) * spec.l_h; ++q) {
                    const double* src = grid.token(p, q);
                    for (std::size_t c = 0; c < grid.d; ++c) dst[c] += src[c];
                }
            }
            for (std::size_t c = 0; c < grid.d; ++c) dst[c] *= inv;
        }
    }
    return out;
}

SpatialGrid expand_surrogate(const SpatialGrid& pooled, const PoolingSpec& spec) {
    SpatialGrid out(pooled.w * spec.l_w, pooled.h * spec.l_h, pooled.d);
    for (std::size_t p = 0; p < out.w; ++p) {
        for (std::size_t q = 0; q < out.h; ++q) {
            const double* src = pooled.token(p / spec.l_w, q / spec.l_h);
            double* dst = out.token(p, q);
            for (std::size_t c = 0; c < pooled.d; ++c) dst[c] = src[c];
        }
    }
    return out;
}

Matrix efficient_cross_attention(const Matrix& q, const ProjectedBank& bank,
                                 const PoolingSpec& spec) {
    check_bank_dim(q, bank);
    auto [kt, vt] = pooled_spatial_kv(bank, spec);
    const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
    const double balance = std::log(static_cast<double>(spec.window()));
    Matrix spatial_logits = matmul_nt(q, kt);
    for (double& x : spatial_logits.data()) x = x * scale + balance;
    Matrix logits = spatial_logits;
    if (bank.key_pointers.rows() > 0) {
        Matrix pointer_logits = matmul_nt(q, bank.key_pointers);
        for (double& x : pointer_logits.data()) x *= scale;
        logits = concat_cols(spatial_logits, pointer_logits);
    }
    return matmul(row_softmax(logits), concat_rows(vt, bank.value_pointers));
}

Matrix key_offset_cross_attention(const Matrix& q, const ProjectedBank& bank,
                                  const PoolingSpec& spec) {
    check_bank_dim(q, bank);
    auto [kt, vt] = pooled_spatial_kv(bank, spec);
    const double offset = std::log(static_cast<double>(spec.window()));
    for (double& x : kt.data()) x += offset;
    return cross_attention(q, concat_rows(kt, bank.key_pointers),
                           concat_rows(vt, bank.value_pointers));
}

Matrix linformer_cross_attention(const Matrix& q, const ProjectedBank& bank,
                                 const PoolingSpec& spec) {
    check_bank_dim(q, bank);
    auto [kt, vt] = pooled_spatial_kv(bank, spec);
    return cross_attention(q, concat_rows(kt, bank.key_pointers),
                           concat_rows(vt, bank.value_pointers));
}

Matrix local_windowed_cross_attention(const Matrix& q, const Matrix& k, const Matrix& v,
                                      std::size_t segments) {
    if (segments == 0) {
        throw SegmentationError("segment count must be at least 1");
    }
    if (q.rows() % segments != 0 || k.rows() % segments != 0) {
        throw SegmentationError("token counts (q " + std::to_string(q.rows()) + ", kv " +
                                std::to_string(k.rows()) + ") not divisible by " +
                                std::to_string(segments) + " segments");
    }
    const std::size_t q_block = q.rows() / segments;
    const std::size_t kv_block = k.rows() / segments;
    Matrix out(q.rows(), v.cols());
    for (std::size_t s = 0; s < segments; ++s) {
        const Matrix block =
            cross_attention(slice_rows(q, s * q_block, q_block),
                            slice_rows(k, s * kv_block, kv_block),
                            slice_rows(v, s * kv_block, kv_block));
        std::copy(block.data().begin(), block.data().end(), out.row(s * q_block));
    }
    return out;
}

Matrix linear_cross_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
    if (k.rows() == 0) {
        throw EmptyMemoryError("linear_cross_attention over zero keys");
    }
    if (q.cols() != k.cols() || q.cols() != v.cols() || k.rows() != v.rows()) {
        throw ShapeError("linear_cross_attention shape mismatch");
    }
    constexpr double kEps = 1e-6;
    auto phi = [](const Matrix& m) {
        Matrix out = m;
        for (double& x : out.data()) x = std::max(x, 0.0) + kEps;
        return out;
    };
    const Matrix phi_q = phi(q);
    const Matrix phi_k = phi(k);
    // Keys aggregated first: phi(K)^T V is d x d regardless of token count.
    const Matrix kv = matmul(transpose(phi_k), v);
    const Matrix numer = matmul(phi_q, kv);
    std::vector<double> key_sum(k.cols(), 0.0);
    for (std::size_t i = 0; i < phi_k.rows(); ++i) {
        for (std::size_t j = 0; j < phi_k.cols(); ++j) key_sum[j] += phi_k.at(i, j);
    }
    Matrix out(q.rows(), v.cols());
    for (std::size_t i = 0; i < q.rows(); ++i) {
        double norm = 0.0;
        for (std::size_t j = 0; j < q.cols(); ++j) norm += phi_q.at(i, j) * key_sum[j];
        if (norm == 0.0) {
            throw DegenerateQueryError("zero normalizer at query row " + std::to_string(i));
        }
        for (std::size_t j = 0; j < v.cols(); ++j) out.at(i, j) = numer.at(i, j) / norm;
    }
    return out;
}

ProjectionResult project(const Matrix& x, const MemoryBank& bank,
                         const AttentionProjections& proj) {
    bank.validate();
    if (x.cols() != proj.w_q.rows()) {
        throw ShapeError("feature dim " + std::to_string(x.cols()) +
                         " does not match w_q input dim " + std::to_string(proj.w_q.rows()));
    }
    if (bank.token_dim() != proj.w_k.rows() || bank.token_dim() != proj.w_v.rows()) {
        throw ShapeError("memory dim " + std::to_string(bank.token_dim()) +
                         " does not match w_k/w_v input dim");
    }
    if (proj.w_q.cols() != proj.w_k.cols() || proj.w_q.cols() != proj.w_v.cols()) {
        throw ShapeError("projections must share the attention dim");
    }
    ProjectionResult result;
    result.q = matmul(x, proj.w_q);
    for (const auto& frame : bank.frames) {
        const Matrix tokens = frame.as_matrix();
        result.bank.key_frames.push_back(
            SpatialGrid::from_matrix(matmul(tokens, proj.w_k), frame.w, frame.h));
        result.bank.value_frames.push_back(
            SpatialGrid::from_matrix(matmul(tokens, proj.w_v), frame.w, frame.h));
    }
    if (bank.pointers.rows() > 0) {
        result.bank.key_pointers = matmul(bank.pointers, proj.w_k);
        result.bank.value_pointers = matmul(bank.pointers, proj.w_v);
    } else {
        result.bank.key_pointers = Matrix(0, proj.w_k.cols());
        result.bank.value_pointers = Matrix(0, proj.w_v.cols());
    }
    return result;
}

Matrix apply_variant(const Matrix& q, const ProjectedBank& bank,
                     const AttentionVariant& variant) {
    variant.validate();
    switch (variant.tag) {
    case VariantTag::Exact:
        return cross_attention(q, bank.full_keys(), bank.full_values());
    case VariantTag::EfficientRebalanced:
        return efficient_cross_attention(q, bank, *variant.pooling);
    case VariantTag::KeyOffset:
        return key_offset_cross_attention(q, bank, *variant.pooling);
    case VariantTag::Linformer:
        return linformer_cross_attention(q, bank, *variant.pooling);
    case VariantTag::LocalWindowed:
        return local_windowed_cross_attention(q, bank.full_keys(), bank.full_values(),
                                              variant.segments);
    case VariantTag::Linear:
        return linear_cross_attention(q, bank.full_keys(), bank.full_values());
    }
    throw ShapeError("unhandled attention variant");
}

} // namespace emca
