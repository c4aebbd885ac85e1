#include "spc/lz77.h"

#include "spc/arith.h"
#include "spc/error.h"

#include <algorithm>

namespace spc {

namespace {

  constexpr size_t kWindow = 1u << 16;
  constexpr size_t kMinMatch = 4;
  constexpr int kHashBits = 15;
  constexpr int kMaxChain = 64;

  uint32_t hash4(const uint8_t* p)
  {
    uint32_t v = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16
      | uint32_t(p[3]) << 24;
    return (v * 2654435761u) >> (32 - kHashBits);
  }

  void putLength(std::vector<uint8_t>& out, size_t extra)
  {
    while (extra >= 255) {
      out.push_back(255);
      extra -= 255;
    }
    out.push_back(uint8_t(extra));
  }

  void emitToken(
    std::vector<uint8_t>& out, std::span<const uint8_t> literals,
    size_t offset, size_t matchLen)
  {
    size_t lit = literals.size();
    size_t m = matchLen ? matchLen - kMinMatch : 0;
    out.push_back(uint8_t(std::min<size_t>(lit, 15) << 4 | std::min<size_t>(m, 15)));
    if (lit >= 15)
      putLength(out, lit - 15);
    out.insert(out.end(), literals.begin(), literals.end());
    if (!matchLen)
      return;
    out.push_back(uint8_t((offset - 1) & 0xFF));
    out.push_back(uint8_t((offset - 1) >> 8));
    if (m >= 15)
      putLength(out, m - 15);
  }

}  // namespace

std::vector<uint8_t>
lz77Encode(std::span<const uint8_t> in)
{
  std::vector<uint8_t> out;
  putVarint(out, in.size());
  if (in.empty())
    return out;

  std::vector<int64_t> head(size_t(1) << kHashBits, -1);
  std::vector<int64_t> prev(in.size(), -1);
  auto insert = [&](size_t pos) {
    if (pos + kMinMatch > in.size())
      return;
    uint32_t h = hash4(&in[pos]);
    prev[pos] = head[h];
    head[h] = int64_t(pos);
  };

  size_t anchor = 0;
  size_t pos = 0;
  while (pos + kMinMatch <= in.size()) {
    size_t bestLen = 0, bestOff = 0;
    int64_t cand = head[hash4(&in[pos])];
    for (int depth = 0; cand >= 0 && depth < kMaxChain; depth++) {
      size_t c = size_t(cand);
      if (pos - c > kWindow)
        break;
      size_t len = 0;
      while (pos + len < in.size() && in[c + len] == in[pos + len])
        len++;
      if (len > bestLen) {
        bestLen = len;
        bestOff = pos - c;
      }
      cand = prev[c];
    }

    if (bestLen >= kMinMatch) {
      emitToken(out, in.subspan(anchor, pos - anchor), bestOff, bestLen);
      for (size_t k = 0; k < bestLen; k++)
        insert(pos + k);
      pos += bestLen;
      anchor = pos;
    }
    else {
      insert(pos);
      pos++;
    }
  }
  if (anchor < in.size())
    emitToken(out, in.subspan(anchor), 0, 0);
  return out;
}

std::vector<uint8_t>
lz77Decode(std::span<const uint8_t> in)
{
  size_t pos = 0;
  uint64_t size = getVarint(in, pos);
  // every output byte needs at least 1/255 of an input byte
  if (size > (in.size() + 1) * 255 * 16 + 4096)
    throwData("lz77: declared length is implausible for the payload");

  std::vector<uint8_t> out;
  out.reserve(size_t(size));
  auto readLength = [&](size_t base) {
    size_t len = base;
    if (base == 15) {
      for (;;) {
        if (pos >= in.size())
          throwData("lz77: truncated length at byte offset " + std::to_string(pos));
        uint8_t b = in[pos++];
        len += b;
        if (b != 255)
          break;
      }
    }
    return len;
  };

  while (out.size() < size || (size == 0 && pos < in.size())) {
    if (pos >= in.size())
      throwData("lz77: truncated token stream at byte offset " + std::to_string(pos));
    uint8_t token = in[pos++];
    size_t lit = readLength(token >> 4);
    if (lit > in.size() - pos || lit > size - out.size())
      throwData("lz77: literal run overflows at byte offset " + std::to_string(pos));
    out.insert(out.end(), in.begin() + long(pos), in.begin() + long(pos + lit));
    pos += lit;
    if (out.size() == size)
      break;

    if (in.size() - pos < 2)
      throwData("lz77: truncated match offset at byte offset " + std::to_string(pos));
    size_t offset = size_t(in[pos]) | size_t(in[pos + 1]) << 8;
    offset += 1;
    pos += 2;
    size_t len = readLength(token & 15) + kMinMatch;
    if (offset > out.size())
      throwData("lz77: match offset reaches before the output start at byte offset " + std::to_string(pos));
    if (len > size - out.size())
      throwData("lz77: match overflows the declared length at byte offset " + std::to_string(pos));
    size_t from = out.size() - offset;
    for (size_t k = 0; k < len; k++)
      out.push_back(out[from + k]);
  }
  if (pos != in.size())
    throwData("lz77: trailing bytes after the final token at byte offset " + std::to_string(pos));
  return out;
}

}  // namespace spc
