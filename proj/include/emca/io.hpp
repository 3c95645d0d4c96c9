#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "emca/block.hpp"
#include "emca/grid.hpp"

namespace emca {

/// JSON manifest of named parameter arrays with shapes. Doubles are emitted
/// with shortest round-trip formatting, so save/load is lossless for 64-bit
/// values.
void save_block_params(const std::string& path, const std::vector<BlockParams>& blocks);
std::vector<BlockParams> load_block_params(const std::string& path);

/// Binary token dump: eight little-endian u64 header values
/// (magic "EMCATOK1", version, rows, cols, w, h, frames, P) followed by
/// rows*cols little-endian IEEE-754 doubles. Round-trips bit-exactly.
struct TokenDump {
    std::uint64_t w = 0;
    std::uint64_t h = 0;
    std::uint64_t frames = 0;
    std::uint64_t pointer_count = 0;
    Matrix tokens; // (frames*w*h + P) x d
};

void write_token_dump(const std::string& path, const TokenDump& dump);
TokenDump read_token_dump(const std::string& path);

} // namespace emca
