// emca: verification, approximation-error, benchmark, and FLOP reports for
// the memory cross-attention kernels.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "emca/analysis.hpp"
#include "emca/attention.hpp"
#include "emca/rng.hpp"
#include "emca/synthetic.hpp"

namespace {

using emca::AttentionVariant;
using emca::Matrix;
using emca::PoolingSpec;
using emca::ProjectedBank;
using emca::VariantTag;
using ordered_json = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitIoError = 3;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::size_t L = 64;
    std::size_t w = 16;
    std::size_t h = 16;
    std::size_t frames = 2;
    std::size_t P = 8;
    std::size_t d = 32;
    std::size_t d_q = 32;
    std::vector<std::string> pooling = {"2x2"};
    std::vector<std::string> variants;
    std::vector<std::size_t> bandwidths = {1, 2, 4};
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string out;
    std::string format = "csv";
    bool variants_explicit = false; // an explicitly empty list means "none"
};

PoolingSpec parse_pooling(const std::string& text) {
    const auto sep = text.find('x');
    if (sep == std::string::npos) {
        throw ConfigError("pooling must look like 2x2, got '" + text + "'");
    }
    try {
        PoolingSpec spec;
        spec.l_w = std::stoul(text.substr(0, sep));
        spec.l_h = std::stoul(text.substr(sep + 1));
        if (spec.l_w == 0 || spec.l_h == 0) throw ConfigError("pooling window must be >= 1x1");
        return spec;
    } catch (const std::logic_error&) {
        throw ConfigError("pooling must look like 2x2, got '" + text + "'");
    }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw emca::IoError("cannot open config file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    try {
        if (j.contains("L")) cfg.L = j["L"].get<std::size_t>();
        if (j.contains("w")) cfg.w = j["w"].get<std::size_t>();
        if (j.contains("h")) cfg.h = j["h"].get<std::size_t>();
        if (j.contains("frames")) cfg.frames = j["frames"].get<std::size_t>();
        if (j.contains("P")) cfg.P = j["P"].get<std::size_t>();
        if (j.contains("d")) cfg.d = j["d"].get<std::size_t>();
        if (j.contains("d_q")) cfg.d_q = j["d_q"].get<std::size_t>();
        if (j.contains("pooling")) cfg.pooling = j["pooling"].get<std::vector<std::string>>();
        if (j.contains("variants")) {
            cfg.variants = j["variants"].get<std::vector<std::string>>();
            cfg.variants_explicit = true;
        }
        if (j.contains("bandwidths"))
            cfg.bandwidths = j["bandwidths"].get<std::vector<std::size_t>>();
        if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
        if (j.contains("out")) cfg.out = j["out"].get<std::string>();
        if (j.contains("format")) cfg.format = j["format"].get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad config field: ") + e.what());
    }
}

void validate_config(const RunConfig& cfg) {
    if (cfg.L == 0 || cfg.w == 0 || cfg.h == 0 || cfg.frames == 0 || cfg.d == 0 ||
        cfg.d_q == 0) {
        throw ConfigError("all shape fields except P must be >= 1");
    }
    if (cfg.format != "csv" && cfg.format != "json") {
        throw ConfigError("format must be csv or json, got '" + cfg.format + "'");
    }
    if (cfg.seeds.empty()) throw ConfigError("seeds must be non-empty");
    if (cfg.bandwidths.empty()) throw ConfigError("bandwidths must be non-empty");
    for (const auto& p : cfg.pooling) {
        const PoolingSpec spec = parse_pooling(p);
        if (cfg.w % spec.l_w != 0 || cfg.h % spec.l_h != 0) {
            throw ConfigError("pooling " + p + " does not divide grid " +
                              std::to_string(cfg.w) + "x" + std::to_string(cfg.h));
        }
    }
    for (const auto& v : cfg.variants) {
        try {
            emca::variant_from_name(v);
        } catch (const std::exception&) {
            throw ConfigError("unknown variant: " + v);
        }
    }
}

Matrix random_matrix(std::size_t rows, std::size_t cols, emca::Rng& rng) {
    Matrix m(rows, cols);
    for (double& x : m.data()) x = rng.uniform(-1.0, 1.0);
    return m;
}

struct Instance {
    Matrix q;
    ProjectedBank bank;
};

// Smooth spatial keys/values (one field per frame), random pointers and
// queries, all derived from the seed.
Instance build_instance(const RunConfig& cfg, std::size_t bandwidth, std::uint64_t seed) {
    Instance inst;
    emca::Rng rng(seed * 0x51a1u + 17);
    for (std::size_t f = 0; f < cfg.frames; ++f) {
        emca::SmoothnessSpec key_spec{0.0, bandwidth, 1.0, seed * 1000 + f * 2};
        emca::SmoothnessSpec value_spec{0.0, bandwidth, 1.0, seed * 1000 + f * 2 + 1};
        inst.bank.key_frames.push_back(emca::gen_smooth_grid(cfg.w, cfg.h, cfg.d, key_spec));
        inst.bank.value_frames.push_back(
            emca::gen_smooth_grid(cfg.w, cfg.h, cfg.d, value_spec));
    }
    inst.bank.key_pointers = random_matrix(cfg.P, cfg.d, rng);
    inst.bank.value_pointers = random_matrix(cfg.P, cfg.d, rng);
    inst.q = random_matrix(cfg.L, cfg.d, rng);
    return inst;
}

AttentionVariant make_variant(VariantTag tag, const PoolingSpec& pooling) {
    AttentionVariant v;
    v.tag = tag;
    if (tag == VariantTag::EfficientRebalanced || tag == VariantTag::KeyOffset ||
        tag == VariantTag::Linformer) {
        v.pooling = pooling;
    }
    return v;
}

std::vector<VariantTag> variant_tags(const RunConfig& cfg,
                                     std::vector<std::string> fallback) {
    const auto& names = cfg.variants.empty() ? fallback : cfg.variants;
    std::vector<VariantTag> tags;
    for (const auto& n : names) tags.push_back(emca::variant_from_name(n));
    return tags;
}

// --- report emission ------------------------------------------------------

void write_report(const RunConfig& cfg, const std::vector<std::string>& header,
                  const std::vector<ordered_json>& rows) {
    std::ostringstream body;
    if (cfg.format == "csv") {
        for (std::size_t i = 0; i < header.size(); ++i) {
            body << (i ? "," : "") << header[i];
        }
        body << "\n";
        for (const auto& row : rows) {
            bool first = true;
            for (const auto& key : header) {
                if (!first) body << ",";
                first = false;
                const auto& cell = row.at(key);
                if (cell.is_string()) {
                    body << cell.get<std::string>();
                } else {
                    body << cell.dump();
                }
            }
            body << "\n";
        }
    } else {
        ordered_json arr = ordered_json::array();
        for (const auto& row : rows) arr.push_back(row);
        body << arr.dump(2) << "\n";
    }
    if (cfg.out.empty()) {
        std::cout << body.str();
        return;
    }
    std::ofstream out(cfg.out);
    if (!out) throw emca::IoError("cannot open output path: " + cfg.out);
    out << body.str();
    if (!out) throw emca::IoError("write failed: " + cfg.out);
}

// --- verify ---------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass;
    double worst;
};

// Exact attention over the full-size replicated surrogate: the reference
// side of the pooled-equivalence identity.
Matrix surrogate_reference(const Matrix& q, const ProjectedBank& bank,
                           const PoolingSpec& spec) {
    ProjectedBank expanded;
    for (const auto& frame : bank.key_frames) {
        expanded.key_frames.push_back(
            emca::expand_surrogate(emca::pool_spatial_tokens(frame, spec), spec));
    }
    for (const auto& frame : bank.value_frames) {
        expanded.value_frames.push_back(
            emca::expand_surrogate(emca::pool_spatial_tokens(frame, spec), spec));
    }
    expanded.key_pointers = bank.key_pointers;
    expanded.value_pointers = bank.value_pointers;
    return emca::cross_attention(q, expanded.full_keys(), expanded.full_values());
}

int cmd_verify(const RunConfig& cfg) {
    std::vector<CheckResult> results;
    auto record = [&](const std::string& name, double worst, double tol) {
        results.push_back({name, worst <= tol, worst});
    };

    const std::size_t bandwidth = cfg.bandwidths.front();

    double lemma1_worst = 0.0;
    double degenerate_worst = 0.0;
    double window_const_worst = 0.0;
    double convexity_worst = 0.0;
    for (std::uint64_t seed : cfg.seeds) {
        const Instance inst = build_instance(cfg, bandwidth, seed);
        for (const auto& p : cfg.pooling) {
            const PoolingSpec spec = parse_pooling(p);
            const Matrix efficient = emca::efficient_cross_attention(inst.q, inst.bank, spec);
            const Matrix reference = surrogate_reference(inst.q, inst.bank, spec);
            lemma1_worst = std::max(
                lemma1_worst, emca::relative_frobenius_error(efficient, reference));

            // Convexity: each output coordinate within [min, max] of values.
            const Matrix values = inst.bank.full_values();
            const Matrix exact_out =
                emca::cross_attention(inst.q, inst.bank.full_keys(), values);
            for (std::size_t j = 0; j < values.cols(); ++j) {
                double lo = values.at(0, j), hi = values.at(0, j);
                for (std::size_t i = 1; i < values.rows(); ++i) {
                    lo = std::min(lo, values.at(i, j));
                    hi = std::max(hi, values.at(i, j));
                }
                for (std::size_t i = 0; i < exact_out.rows(); ++i) {
                    convexity_worst = std::max(
                        convexity_worst, std::max(lo - exact_out.at(i, j),
                                                  exact_out.at(i, j) - hi));
                }
            }
        }

        // Degenerate pooling: 1x1 window makes every pooled variant exact.
        const PoolingSpec unit{1, 1};
        const Matrix exact =
            emca::cross_attention(inst.q, inst.bank.full_keys(), inst.bank.full_values());
        for (VariantTag tag : {VariantTag::EfficientRebalanced, VariantTag::KeyOffset,
                               VariantTag::Linformer}) {
            const Matrix out = emca::apply_variant(inst.q, inst.bank, make_variant(tag, unit));
            degenerate_worst =
                std::max(degenerate_worst, emca::relative_frobenius_error(out, exact));
        }

        // Window-constant bank: pooling loses nothing.
        {
            const PoolingSpec spec = parse_pooling(cfg.pooling.front());
            ProjectedBank constant = inst.bank;
            for (auto* frames : {&constant.key_frames, &constant.value_frames}) {
                for (auto& frame : *frames) {
                    frame = emca::expand_surrogate(emca::pool_spatial_tokens(frame, spec),
                                                   spec);
                }
            }
            const Matrix exact_const =
                emca::cross_attention(inst.q, constant.full_keys(), constant.full_values());
            const Matrix efficient_const =
                emca::efficient_cross_attention(inst.q, constant, spec);
            window_const_worst = std::max(
                window_const_worst,
                emca::relative_frobenius_error(efficient_const, exact_const));
        }
    }
    record("lemma1-identity", lemma1_worst, 1e-10);
    record("degenerate-pooling", degenerate_worst, 1e-12);
    record("window-constant", window_const_worst, 1e-12);
    record("convexity", convexity_worst, 1e-12);

    // Shift equivalence: without pointers the balancing constant cancels.
    {
        RunConfig no_pointers = cfg;
        no_pointers.P = 0;
        double worst = 0.0;
        for (std::uint64_t seed : cfg.seeds) {
            const Instance inst = build_instance(no_pointers, bandwidth, seed);
            for (const auto& p : cfg.pooling) {
                const PoolingSpec spec = parse_pooling(p);
                worst = std::max(
                    worst, emca::relative_frobenius_error(
                               emca::efficient_cross_attention(inst.q, inst.bank, spec),
                               emca::linformer_cross_attention(inst.q, inst.bank, spec)));
            }
        }
        record("shift-equivalence", worst, 1e-12);
    }

    bool all_pass = true;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (worst = " << r.worst
                  << ")\n";
        all_pass = all_pass && r.pass;
    }
    return all_pass ? kExitOk : kExitCheckFailure;
}

// --- approx ---------------------------------------------------------------

const std::vector<std::string> kApproxHeader = {
    "variant",       "L",           "n",          "P",
    "d",             "l_w",         "l_h",        "bandwidth",
    "seed",          "rel_frobenius", "max_row_rel", "locality_c",
    "wall_ns_exact", "wall_ns_variant"};

int cmd_approx(const RunConfig& cfg) {
    const auto tags = variant_tags(
        cfg, {"efficient", "keyoffset", "linformer", "localwindow", "linear"});
    std::vector<ordered_json> rows;
    for (VariantTag tag : tags) {
        for (const auto& p : cfg.pooling) {
            const PoolingSpec spec = parse_pooling(p);
            for (std::size_t bandwidth : cfg.bandwidths) {
                for (std::uint64_t seed : cfg.seeds) {
                    const Instance inst = build_instance(cfg, bandwidth, seed);
                    const auto reports = emca::compare_variants(
                        inst.q, inst.bank, {make_variant(tag, spec)});
                    const auto& r = reports.front();
                    rows.push_back(ordered_json{{"variant", emca::variant_name(tag)},
                                                {"L", r.L},
                                                {"n", r.n},
                                                {"P", r.P},
                                                {"d", r.d},
                                                {"l_w", spec.l_w},
                                                {"l_h", spec.l_h},
                                                {"bandwidth", bandwidth},
                                                {"seed", seed},
                                                {"rel_frobenius", r.rel_frobenius},
                                                {"max_row_rel", r.max_row_rel},
                                                {"locality_c", r.locality_c},
                                                {"wall_ns_exact", r.wall_ns_exact},
                                                {"wall_ns_variant", r.wall_ns_variant}});
                }
            }
        }
    }
    write_report(cfg, kApproxHeader, rows);
    return kExitOk;
}

// --- bench ----------------------------------------------------------------

int cmd_bench(const RunConfig& cfg) {
    const auto tags = variant_tags(cfg, {"exact", "efficient"});
    const std::vector<std::string> header = {"variant", "L",   "n",       "P",
                                             "d",       "l_w", "l_h",     "wall_ns",
                                             "speedup_vs_exact"};
    std::vector<ordered_json> rows;
    for (VariantTag tag : tags) {
        for (const auto& p : cfg.pooling) {
            const PoolingSpec spec = parse_pooling(p);
            const Instance inst =
                build_instance(cfg, cfg.bandwidths.front(), cfg.seeds.front());
            const auto reports =
                emca::compare_variants(inst.q, inst.bank, {make_variant(tag, spec)}, true);
            const auto& r = reports.front();
            rows.push_back(ordered_json{{"variant", emca::variant_name(tag)},
                                        {"L", r.L},
                                        {"n", r.n},
                                        {"P", r.P},
                                        {"d", r.d},
                                        {"l_w", spec.l_w},
                                        {"l_h", spec.l_h},
                                        {"wall_ns", r.wall_ns_variant},
                                        {"speedup_vs_exact",
                                         r.wall_ns_exact / r.wall_ns_variant}});
        }
    }
    write_report(cfg, header, rows);
    return kExitOk;
}

// --- flops ----------------------------------------------------------------

int cmd_flops(const RunConfig& cfg) {
    std::vector<VariantTag> tags;
    if (!cfg.variants.empty() || cfg.variants_explicit) {
        // An explicitly empty list yields a header-only file.
        tags = variant_tags(cfg, {});
    } else {
        tags = {VariantTag::Exact, VariantTag::EfficientRebalanced, VariantTag::KeyOffset,
                VariantTag::Linformer, VariantTag::LocalWindowed, VariantTag::Linear};
    }
    const std::size_t n = cfg.frames * cfg.w * cfg.h;
    const std::vector<std::string> header = {"variant", "L",   "n",     "P",
                                             "d",       "l_w", "l_h",   "flops",
                                             "attention_term_ratio"};
    std::vector<ordered_json> rows;
    for (VariantTag tag : tags) {
        for (const auto& p : cfg.pooling) {
            const PoolingSpec spec = parse_pooling(p);
            const AttentionVariant variant = make_variant(tag, spec);
            rows.push_back(
                ordered_json{{"variant", emca::variant_name(tag)},
                             {"L", cfg.L},
                             {"n", n},
                             {"P", cfg.P},
                             {"d", cfg.d},
                             {"l_w", spec.l_w},
                             {"l_h", spec.l_h},
                             {"flops", emca::flop_count(variant, cfg.L, n, cfg.P, cfg.d)},
                             {"attention_term_ratio",
                              emca::attention_term_ratio(variant, cfg.L, n, cfg.P, cfg.d)}});
        }
    }
    write_report(cfg, header, rows);
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Memory cross-attention verification and benchmark suite"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    std::vector<std::string> seed_args;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override it");
        sub->add_option("-L,--queries", cfg.L, "query token count");
        sub->add_option("--width", cfg.w, "spatial grid width");
        sub->add_option("--height", cfg.h, "spatial grid height");
        sub->add_option("--frames", cfg.frames, "memory frame count");
        sub->add_option("-P,--pointers", cfg.P, "object pointer token count");
        sub->add_option("-d,--dim", cfg.d, "attention dimension");
        sub->add_option("--dq", cfg.d_q, "frame feature dimension");
        sub->add_option("--pooling", cfg.pooling, "pooling windows, e.g. 2x2 4x4");
        sub->add_option("--variants", cfg.variants,
                        "variants: exact efficient keyoffset linformer localwindow linear");
        sub->add_option("--bandwidths", cfg.bandwidths, "smoothness bandwidth levels");
        sub->add_option("--seeds", seed_args, "seed list (comma or space separated)");
        sub->add_option("--out", cfg.out, "output path (default stdout)");
        sub->add_option("--format", cfg.format, "csv or json");
    };

    CLI::App* verify = app.add_subcommand("verify", "run the identity/invariant suite");
    CLI::App* approx = app.add_subcommand("approx", "approximation-error sweep");
    CLI::App* bench = app.add_subcommand("bench", "wall-clock benchmark");
    CLI::App* flops = app.add_subcommand("flops", "analytic FLOP model report");
    for (CLI::App* sub : {verify, approx, bench, flops}) add_common(sub);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    try {
        if (!config_path.empty()) {
            RunConfig from_file;
            load_config_file(config_path, from_file);
            // Flags override the file: re-parse onto the file-derived config.
            CLI::App* sub = app.get_subcommands().front();
            auto override_if_set = [&](const char* flag, auto& target, auto& source) {
                if (sub->count(flag) == 0) target = source;
            };
            override_if_set("--queries", cfg.L, from_file.L);
            override_if_set("--width", cfg.w, from_file.w);
            override_if_set("--height", cfg.h, from_file.h);
            override_if_set("--frames", cfg.frames, from_file.frames);
            override_if_set("--pointers", cfg.P, from_file.P);
            override_if_set("--dim", cfg.d, from_file.d);
            override_if_set("--dq", cfg.d_q, from_file.d_q);
            override_if_set("--pooling", cfg.pooling, from_file.pooling);
            override_if_set("--variants", cfg.variants, from_file.variants);
            if (sub->count("--variants") == 0) {
                cfg.variants_explicit = from_file.variants_explicit;
            }
            override_if_set("--bandwidths", cfg.bandwidths, from_file.bandwidths);
            override_if_set("--out", cfg.out, from_file.out);
            override_if_set("--format", cfg.format, from_file.format);
            if (app.get_subcommands().front()->count("--seeds") == 0) {
                cfg.seeds = from_file.seeds;
            }
        }
        if (!seed_args.empty()) {
            cfg.seeds.clear();
            for (const auto& arg : seed_args) {
                std::stringstream ss(arg);
                std::string item;
                while (std::getline(ss, item, ',')) {
                    if (!item.empty()) cfg.seeds.push_back(std::stoull(item));
                }
            }
        }
        validate_config(cfg);

        if (*verify) return cmd_verify(cfg);
        if (*approx) return cmd_approx(cfg);
        if (*bench) return cmd_bench(cfg);
        return cmd_flops(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const emca::PoolingError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const emca::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIoError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailure;
    }
}
