#include "emca/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "emca/synthetic.hpp"

namespace emca {

namespace {

using Clock = std::chrono::steady_clock;

double time_once(const Matrix& q, const ProjectedBank& bank,
                 const AttentionVariant& variant) {
    const auto start = Clock::now();
    volatile double sink = apply_variant(q, bank, variant).at(0, 0);
    (void)sink;
    return static_cast<double>(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start).count());
}

double median_wall_ns(const Matrix& q, const ProjectedBank& bank,
                      const AttentionVariant& variant, std::size_t warmup_runs,
                      std::size_t timed_runs) {
    for (std::size_t i = 0; i < warmup_runs; ++i) time_once(q, bank, variant);
    std::vector<double> samples;
    samples.reserve(timed_runs);
    for (std::size_t i = 0; i < timed_runs; ++i) samples.push_back(time_once(q, bank, variant));
    std::sort(samples.begin(), samples.end());
    const std::size_t mid = samples.size() / 2;
    return samples.size() % 2 == 1 ? samples[mid]
                                   : 0.5 * (samples[mid - 1] + samples[mid]);
}

// Attention-only cost over m key/value tokens: logits, weighted sum, softmax.
std::uint64_t attention_terms(std::uint64_t L, std::uint64_t m, std::uint64_t d) {
    return 4 * L * m * d + 3 * L * m;
}

std::uint64_t pooled_m(const AttentionVariant& variant, std::uint64_t n, std::uint64_t P) {
    const std::uint64_t window = variant.pooling->window();
    if (window == 0 || n % window != 0) {
        throw PoolingError("pooling window " + std::to_string(variant.pooling->l_w) + "x" +
                           std::to_string(variant.pooling->l_h) + " does not divide n = " +
                           std::to_string(n));
    }
    return n / window + P;
}

} // namespace

std::vector<ApproxReport> compare_variants(const Matrix& q, const ProjectedBank& bank,
                                           const std::vector<AttentionVariant>& variants,
                                           bool measure_time, std::size_t warmup_runs,
                                           std::size_t timed_runs) {
    bank.validate();
    const AttentionVariant exact{VariantTag::Exact, std::nullopt, 4};
    const Matrix reference = apply_variant(q, bank, exact);
    double locality = 0.0;
    for (const auto& frame : bank.key_frames) {
        if (frame.tokens() >= 2) {
            locality = std::max(locality, measure_locality(frame));
        }
    }
    const double exact_ns =
        measure_time ? median_wall_ns(q, bank, exact, warmup_runs, timed_runs) : 0.0;

    std::vector<ApproxReport> reports;
    reports.reserve(variants.size());
    for (const auto& variant : variants) {
        const Matrix out = apply_variant(q, bank, variant);
        ApproxReport report;
        report.variant = variant;
        report.L = q.rows();
        report.n = bank.spatial_tokens();
        report.P = bank.key_pointers.rows();
        report.d = q.cols();
        report.rel_frobenius = relative_frobenius_error(out, reference);
        report.max_row_rel = max_row_relative_error(out, reference);
        report.locality_c = locality;
        if (measure_time) {
            report.wall_ns_exact = exact_ns;
            report.wall_ns_variant =
                median_wall_ns(q, bank, variant, warmup_runs, timed_runs);
        }
        reports.push_back(std::move(report));
    }
    return reports;
}

std::uint64_t flop_count(const AttentionVariant& variant, std::size_t L, std::size_t n,
                         std::size_t P, std::size_t d) {
    variant.validate();
    const std::uint64_t m = n + P;
    switch (variant.tag) {
    case VariantTag::Exact:
        return attention_terms(L, m, d);
    case VariantTag::EfficientRebalanced:
    case VariantTag::KeyOffset:
    case VariantTag::Linformer:
        return attention_terms(L, pooled_m(variant, n, P), d) +
               static_cast<std::uint64_t>(n) * d;
    case VariantTag::LocalWindowed: {
        if (variant.segments == 0 || L % variant.segments != 0 ||
            m % variant.segments != 0) {
            throw SegmentationError("token counts not divisible by " +
                                    std::to_string(variant.segments) + " segments");
        }
        return attention_terms(L / variant.segments, m / variant.segments, d) *
               variant.segments;
    }
    case VariantTag::Linear:
        // phi maps, phi(K)^T V and phi(Q)(..), key sums, normalizers, divide.
        return 2 * static_cast<std::uint64_t>(d) * d * (L + m) + (L + m) * d + m * d +
               2 * static_cast<std::uint64_t>(L) * d + static_cast<std::uint64_t>(L) * d;
    }
    throw ShapeError("unhandled variant in flop_count");
}

double attention_term_ratio(const AttentionVariant& variant, std::size_t L, std::size_t n,
                            std::size_t P, std::size_t d) {
    variant.validate();
    const double exact_terms = static_cast<double>(attention_terms(L, n + P, d));
    switch (variant.tag) {
    case VariantTag::Exact:
        return 1.0;
    case VariantTag::EfficientRebalanced:
    case VariantTag::KeyOffset:
    case VariantTag::Linformer:
        return exact_terms / static_cast<double>(attention_terms(L, pooled_m(variant, n, P), d));
    case VariantTag::LocalWindowed:
    case VariantTag::Linear:
        return exact_terms / static_cast<double>(flop_count(variant, L, n, P, d));
    }
    throw ShapeError("unhandled variant in attention_term_ratio");
}

} // namespace emca
