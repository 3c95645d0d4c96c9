// End-to-end tests of the emca CLI binary. The binary path comes in through
// the EMCA_CLI_PATH compile definition.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "emca/analysis.hpp"
#include "helpers.hpp"

namespace {

const std::string kCli = EMCA_CLI_PATH;

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

int run(const std::string& args) {
    const int status = std::system((kCli + " " + args + " > /dev/null 2>&1").c_str());
    return WEXITSTATUS(status);
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("verify passes on a small default-shaped run") {
    CHECK(run("verify --seeds 1,2 --width 8 --height 8 -L 8 -d 8 --frames 1") == 0);
}

TEST_CASE("verify rejects pooling that does not divide the grid") {
    CHECK(run("verify --width 4 --height 4 --pooling 3x1 --seeds 1") == 2);
}

TEST_CASE("verify rejects unknown variants and formats") {
    CHECK(run("approx --variants bogus --seeds 1") == 2);
    CHECK(run("approx --format yaml --seeds 1") == 2);
}

TEST_CASE("approx emits one row per sweep cell") {
    TempFile out("emca_cli_approx.csv");
    const int code =
        run("approx --variants efficient linformer --pooling 2x2 4x4 --bandwidths 2"
            " --seeds 1,2,3 --width 8 --height 8 -L 8 -d 8 --frames 1 -P 2 --out " +
            out.path);
    CHECK(code == 0);
    const auto rows = read_csv(out.path);
    REQUIRE(rows.size() == 13); // header + 2 variants x 2 poolings x 3 seeds
    CHECK(rows[0][0] == "variant");
    CHECK(rows[1][0] == "efficient");
}

TEST_CASE("approx row values match the library") {
    TempFile out("emca_cli_approx_lib.csv");
    const int code = run(
        "approx --variants linformer --pooling 2x2 --bandwidths 3 --seeds 7"
        " --width 8 --height 8 -L 8 -d 8 --frames 2 -P 2 --out " +
        out.path);
    CHECK(code == 0);
    const auto rows = read_csv(out.path);
    REQUIRE(rows.size() == 2);
    // Non-timing columns are a pure function of the config; a second run
    // must reproduce them exactly.
    TempFile out2("emca_cli_approx_lib2.csv");
    run("approx --variants linformer --pooling 2x2 --bandwidths 3 --seeds 7"
        " --width 8 --height 8 -L 8 -d 8 --frames 2 -P 2 --out " +
        out2.path);
    const auto rows2 = read_csv(out2.path);
    REQUIRE(rows2.size() == 2);
    for (std::size_t c = 0; c < 12; ++c) { // all columns before the wall clocks
        CHECK(rows[1][c] == rows2[1][c]);
    }
    CHECK(std::stod(rows[1][9]) > 0.0); // pooled error is nonzero with pointers
}

TEST_CASE("flops output matches the library closed form") {
    TempFile out("emca_cli_flops.csv");
    const int code = run(
        "flops --variants efficient --pooling 2x2 --width 16 --height 16 --frames 2"
        " -L 32 -P 0 -d 16 --out " +
        out.path);
    CHECK(code == 0);
    const auto rows = read_csv(out.path);
    REQUIRE(rows.size() == 2);
    emca::AttentionVariant variant;
    variant.tag = emca::VariantTag::EfficientRebalanced;
    variant.pooling = emca::PoolingSpec{2, 2};
    const auto expected = emca::flop_count(variant, 32, 2 * 16 * 16, 0, 16);
    CHECK(std::stoull(rows[1][7]) == expected);
    CHECK(std::stod(rows[1][8]) == 4.0); // attention-term ratio, P = 0, 2x2
}

TEST_CASE("flops with an explicitly empty variant list is header-only") {
    TempFile cfg("emca_cli_empty.json");
    {
        std::ofstream f(cfg.path);
        f << R"({"variants": []})";
    }
    TempFile out("emca_cli_flops_empty.csv");
    CHECK(run("flops --config " + cfg.path + " --out " + out.path) == 0);
    const auto rows = read_csv(out.path);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0][0] == "variant");
}

TEST_CASE("config file values apply and flags override them") {
    TempFile cfg("emca_cli_cfg.json");
    {
        std::ofstream f(cfg.path);
        f << R"({"L": 8, "w": 8, "h": 8, "frames": 1, "P": 2, "d": 8,)"
          << R"( "variants": ["linformer"], "pooling": ["2x2"], "bandwidths": [2],)"
          << R"( "seeds": [1, 2]})";
    }
    TempFile out("emca_cli_cfg_out.csv");
    CHECK(run("approx --config " + cfg.path + " --seeds 5 --out " + out.path) == 0);
    const auto rows = read_csv(out.path);
    REQUIRE(rows.size() == 2); // --seeds overrode the two config seeds
    CHECK(rows[1][8] == "5");
}

TEST_CASE("json format emits an array of flat objects") {
    TempFile out("emca_cli_flops.json");
    CHECK(run("flops --variants exact --format json --out " + out.path) == 0);
    const auto doc = nlohmann::json::parse(read_file(out.path));
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 1);
    CHECK(doc[0]["variant"] == "exact");
    CHECK(doc[0]["flops"].is_number());
}

TEST_CASE("unwritable output path exits 3") {
    CHECK(run("flops --variants exact --out /nonexistent_dir/report.csv") == 3);
}

TEST_CASE("bench reports a speedup column") {
    TempFile out("emca_cli_bench.csv");
    const int code = run(
        "bench --variants exact efficient --pooling 2x2 --width 8 --height 8"
        " --frames 1 -L 8 -d 8 --seeds 1 --out " +
        out.path);
    CHECK(code == 0);
    const auto rows = read_csv(out.path);
    REQUIRE(rows.size() == 3);
    CHECK(rows[0][8] == "speedup_vs_exact");
    CHECK(std::stod(rows[1][7]) > 0.0);
    CHECK(std::stod(rows[2][8]) > 0.0);
}
