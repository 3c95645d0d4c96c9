#include "emca/io.hpp"

#include <cstring>
#include <fstream>

#include <json.hpp>

namespace emca {

namespace {

using nlohmann::json;

constexpr std::uint64_t kTokenMagic = 0x454d4341544f4b31ull; // "EMCATOK1"
constexpr std::uint64_t kTokenVersion = 1;

json matrix_to_json(const Matrix& m) {
    return json{{"shape", {m.rows(), m.cols()}}, {"data", m.data()}};
}

Matrix matrix_from_json(const json& j) {
    const auto shape = j.at("shape");
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    return Matrix(shape.at(0).get<std::size_t>(), shape.at(1).get<std::size_t>(),
                  std::move(data));
}

json norm_to_json(const NormParams& n) {
    return json{{"scale", n.scale}, {"bias", n.bias}};
}

NormParams norm_from_json(const json& j) {
    NormParams n;
    n.scale = j.at("scale").get<std::vector<double>>();
    n.bias = j.at("bias").get<std::vector<double>>();
    return n;
}

void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(buf), 8);
}

std::uint64_t read_u64(std::istream& in) {
    unsigned char buf[8];
    in.read(reinterpret_cast<char*>(buf), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
}

} // namespace

void save_block_params(const std::string& path, const std::vector<BlockParams>& blocks) {
    json manifest;
    manifest["format"] = "emca-params";
    manifest["version"] = 1;
    manifest["blocks"] = json::array();
    for (const auto& b : blocks) {
        manifest["blocks"].push_back(json{
            {"self_w_q", matrix_to_json(b.self_proj.w_q)},
            {"self_w_k", matrix_to_json(b.self_proj.w_k)},
            {"self_w_v", matrix_to_json(b.self_proj.w_v)},
            {"self_out", matrix_to_json(b.self_out)},
            {"cross_w_q", matrix_to_json(b.cross_proj.w_q)},
            {"cross_w_k", matrix_to_json(b.cross_proj.w_k)},
            {"cross_w_v", matrix_to_json(b.cross_proj.w_v)},
            {"cross_out", matrix_to_json(b.cross_out)},
            {"mlp_in", matrix_to_json(b.mlp_in)},
            {"mlp_out", matrix_to_json(b.mlp_out)},
            {"norm_self", norm_to_json(b.norm_self)},
            {"norm_cross", norm_to_json(b.norm_cross)},
            {"norm_mlp", norm_to_json(b.norm_mlp)},
        });
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << manifest.dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

std::vector<BlockParams> load_block_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::parse_error& e) {
        throw IoError("malformed parameter manifest " + path + ": " + e.what());
    }
    if (manifest.value("format", "") != "emca-params") {
        throw IoError("not an emca parameter manifest: " + path);
    }
    std::vector<BlockParams> blocks;
    for (const auto& jb : manifest.at("blocks")) {
        BlockParams b;
        b.self_proj.w_q = matrix_from_json(jb.at("self_w_q"));
        b.self_proj.w_k = matrix_from_json(jb.at("self_w_k"));
        b.self_proj.w_v = matrix_from_json(jb.at("self_w_v"));
        b.self_out = matrix_from_json(jb.at("self_out"));
        b.cross_proj.w_q = matrix_from_json(jb.at("cross_w_q"));
        b.cross_proj.w_k = matrix_from_json(jb.at("cross_w_k"));
        b.cross_proj.w_v = matrix_from_json(jb.at("cross_w_v"));
        b.cross_out = matrix_from_json(jb.at("cross_out"));
        b.mlp_in = matrix_from_json(jb.at("mlp_in"));
        b.mlp_out = matrix_from_json(jb.at("mlp_out"));
        b.norm_self = norm_from_json(jb.at("norm_self"));
        b.norm_cross = norm_from_json(jb.at("norm_cross"));
        b.norm_mlp = norm_from_json(jb.at("norm_mlp"));
        blocks.push_back(std::move(b));
    }
    return blocks;
}

void write_token_dump(const std::string& path, const TokenDump& dump) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    write_u64(out, kTokenMagic);
    write_u64(out, kTokenVersion);
    write_u64(out, dump.tokens.rows());
    write_u64(out, dump.tokens.cols());
    write_u64(out, dump.w);
    write_u64(out, dump.h);
    write_u64(out, dump.frames);
    write_u64(out, dump.pointer_count);
    for (double v : dump.tokens.data()) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        write_u64(out, bits);
    }
    if (!out) throw IoError("write failed: " + path);
}

TokenDump read_token_dump(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    if (read_u64(in) != kTokenMagic) throw IoError("bad token dump magic: " + path);
    if (read_u64(in) != kTokenVersion) throw IoError("unsupported token dump version");
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    TokenDump dump;
    dump.w = read_u64(in);
    dump.h = read_u64(in);
    dump.frames = read_u64(in);
    dump.pointer_count = read_u64(in);
    std::vector<double> data(rows * cols);
    for (double& v : data) {
        const std::uint64_t bits = read_u64(in);
        std::memcpy(&v, &bits, sizeof v);
    }
    if (!in) throw IoError("truncated token dump: " + path);
    dump.tokens = Matrix(rows, cols, std::move(data));
    return dump;
}

} // namespace emca
