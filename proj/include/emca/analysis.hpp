#pragma once

#include <cstdint>
#include <vector>

#include "emca/attention.hpp"

namespace emca {

/// Exact-vs-variant comparison record for one instance.
struct ApproxReport {
    AttentionVariant variant;
    std::size_t L = 0;
    std::size_t n = 0;
    std::size_t P = 0;
    std::size_t d = 0;
    double rel_frobenius = 0.0;
    double max_row_rel = 0.0;
    double locality_c = 0.0;   // max measured over key frames
    double wall_ns_exact = 0.0;
    double wall_ns_variant = 0.0;
};

/// Runs the exact kernel once per instance and each requested variant,
/// filling error fields deterministically. Timing (when enabled) is the
/// median of `timed_runs` runs after `warmup_runs` warmups on a monotonic
/// clock.
std::vector<ApproxReport> compare_variants(const Matrix& q, const ProjectedBank& bank,
                                           const std::vector<AttentionVariant>& variants,
                                           bool measure_time = true,
                                           std::size_t warmup_runs = 2,
                                           std::size_t timed_runs = 5);

/// Analytic multiply-add counts. Convention: multiply and add are separate
/// operations; softmax costs 3 ops per logit (sub-max, exp, divide).
///   exact:        4*L*m*d + 3*L*m with m = n + P
///   pooled:       same with m = n/(l_w*l_h) + P, plus n*d pooling cost
///   localwindow:  exact cost divided by the segment count
///   linear:       feature maps + d x d aggregation: 2*d*d*(L+m) +
///                 (L+m)*d + m*d + 2*L*d + L*d
std::uint64_t flop_count(const AttentionVariant& variant, std::size_t L, std::size_t n,
                         std::size_t P, std::size_t d);

/// Ratio of exact to variant cost on the attention terms alone (pooling
/// overhead excluded): (n + P) / (n/(l_w*l_h) + P) for pooled variants,
/// the segment count for local-windowed, 1 for exact.
double attention_term_ratio(const AttentionVariant& variant, std::size_t L, std::size_t n,
                            std::size_t P, std::size_t d);

} // namespace emca
