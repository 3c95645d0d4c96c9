#include <doctest.h>

#include "emca/block.hpp"
#include "helpers.hpp"

using namespace emca;

namespace {

MemoryBank small_bank(std::uint64_t seed, std::size_t d_m = 4, std::size_t pointers = 2) {
    MemoryBank bank;
    bank.frames.push_back(test::random_grid(2, 2, d_m, seed));
    bank.pointers = test::random_matrix(pointers, d_m, seed + 1);
    return bank;
}

const AttentionVariant kExact{VariantTag::Exact, std::nullopt, 4};

} // namespace

TEST_CASE("zero output projections reduce the block to the identity") {
    BlockParams params = random_block_params(4, 4, 4, 8, 7);
    params.self_out = Matrix(4, 4);
    params.cross_out = Matrix(4, 4);
    params.mlp_out = Matrix(8, 4);
    const FrameFeatures x{test::random_matrix(3, 4, 8)};
    const FrameFeatures out = memory_attention_block(x, small_bank(9), params, kExact);
    CHECK(out.tokens == x.tokens);
}

TEST_CASE("block output matches step-wise composition of the kernels") {
    const BlockParams params = random_block_params(4, 4, 4, 8, 17);
    const MemoryBank bank = small_bank(18);
    const FrameFeatures x{test::random_matrix(1, 4, 19)};

    const Matrix n0 = layer_norm(x.tokens, params.norm_self);
    const Matrix self = test::naive_attention(matmul(n0, params.self_proj.w_q),
                                              matmul(n0, params.self_proj.w_k),
                                              matmul(n0, params.self_proj.w_v));
    Matrix x1 = x.tokens;
    const Matrix self_proj = matmul(self, params.self_out);
    for (std::size_t i = 0; i < x1.size(); ++i) x1.data()[i] += self_proj.data()[i];

    const auto projected = project(layer_norm(x1, params.norm_cross), bank, params.cross_proj);
    const Matrix cross = test::naive_attention(projected.q, projected.bank.full_keys(),
                                               projected.bank.full_values());
    Matrix x2 = x1;
    const Matrix cross_proj = matmul(cross, params.cross_out);
    for (std::size_t i = 0; i < x2.size(); ++i) x2.data()[i] += cross_proj.data()[i];

    Matrix hidden = matmul(layer_norm(x2, params.norm_mlp), params.mlp_in);
    for (double& v : hidden.data()) v = v > 0.0 ? v : 0.0;
    Matrix expected = x2;
    const Matrix mlp = matmul(hidden, params.mlp_out);
    for (std::size_t i = 0; i < expected.size(); ++i) expected.data()[i] += mlp.data()[i];

    const FrameFeatures out = memory_attention_block(x, bank, params, kExact);
    CHECK(relative_frobenius_error(out.tokens, expected) < 1e-12);
}

TEST_CASE("exact and 1x1-pooled efficient variants agree end-to-end") {
    const BlockParams params = random_block_params(5, 4, 6, 10, 27);
    const MemoryBank bank = small_bank(28);
    const FrameFeatures x{test::random_matrix(4, 5, 29)};
    AttentionVariant efficient;
    efficient.tag = VariantTag::EfficientRebalanced;
    efficient.pooling = PoolingSpec{1, 1};
    const FrameFeatures a = memory_attention_block(x, bank, params, kExact);
    const FrameFeatures b = memory_attention_block(x, bank, params, efficient);
    CHECK(relative_frobenius_error(b.tokens, a.tokens) < 1e-10);
}

TEST_CASE("empty stack is the identity") {
    const FrameFeatures x{test::random_matrix(3, 4, 37)};
    const FrameFeatures out = memory_attention_stack(x, small_bank(38), {}, kExact);
    CHECK(out.tokens == x.tokens);
}

TEST_CASE("one-block stack equals the block itself") {
    const BlockParams params = random_block_params(4, 4, 4, 8, 47);
    const MemoryBank bank = small_bank(48);
    const FrameFeatures x{test::random_matrix(3, 4, 49)};
    CHECK(memory_attention_stack(x, bank, {params}, kExact).tokens ==
          memory_attention_block(x, bank, params, kExact).tokens);
}

TEST_CASE("two-block stack equals manual composition") {
    const BlockParams b1 = random_block_params(4, 4, 4, 8, 57);
    const BlockParams b2 = random_block_params(4, 4, 4, 8, 58);
    const MemoryBank bank = small_bank(59);
    const FrameFeatures x{test::random_matrix(3, 4, 60)};
    const FrameFeatures manual =
        memory_attention_block(memory_attention_block(x, bank, b1, kExact), bank, b2, kExact);
    CHECK(memory_attention_stack(x, bank, {b1, b2}, kExact).tokens == manual.tokens);
}

TEST_CASE("stack preserves shape and finiteness") {
    const std::vector<BlockParams> blocks = {random_block_params(6, 4, 8, 12, 67),
                                             random_block_params(6, 4, 8, 12, 68)};
    const MemoryBank bank = small_bank(69);
    const FrameFeatures x{test::random_matrix(7, 6, 70, -10.0, 10.0)};
    const FrameFeatures out = memory_attention_stack(x, bank, blocks, kExact);
    CHECK(out.tokens.rows() == 7);
    CHECK(out.tokens.cols() == 6);
    CHECK(out.tokens.all_finite());
}

TEST_CASE("stack is deterministic") {
    const std::vector<BlockParams> blocks = {random_block_params(4, 4, 4, 8, 77)};
    const MemoryBank bank = small_bank(78);
    const FrameFeatures x{test::random_matrix(3, 4, 79)};
    CHECK(memory_attention_stack(x, bank, blocks, kExact).tokens ==
          memory_attention_stack(x, bank, blocks, kExact).tokens);
}

TEST_CASE("block rejects mismatched shapes") {
    const BlockParams params = random_block_params(4, 4, 4, 8, 87);
    const FrameFeatures wrong{test::random_matrix(3, 5, 88)};
    CHECK_THROWS_AS(memory_attention_block(wrong, small_bank(89), params, kExact),
                    ShapeError);
    BlockParams thin = params;
    thin.mlp_in = Matrix(4, 2);
    thin.mlp_out = Matrix(2, 4);
    const FrameFeatures x{test::random_matrix(3, 4, 90)};
    CHECK_THROWS_AS(memory_attention_block(x, small_bank(91), thin, kExact), ShapeError);
}
