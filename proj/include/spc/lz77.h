#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace spc {

// Greedy LZ77 over a 64 KiB window, minimum match 4.
//
// Stream: LEB128 decoded length, then tokens. A token byte carries the
// literal-run length in its high nibble and match length - 4 in its low
// nibble; a nibble of 15 continues in extension bytes (255 = keep adding).
// Order per token: token, literal extension, literals, then (unless the
// output is complete) a 16-bit little-endian offset - 1 and the match
// extension.
std::vector<uint8_t> lz77Encode(std::span<const uint8_t> in);
std::vector<uint8_t> lz77Decode(std::span<const uint8_t> in);

}  // namespace spc
