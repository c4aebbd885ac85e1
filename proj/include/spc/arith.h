#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace spc {

// Adaptive frequency table. Counts start at one; each coded symbol adds
// `increment`, and the table is halved (floor 1) once the total exceeds
// `limit`.
class AdaptiveModel {
public:
  static constexpr uint32_t kIncrement = 32;
  static constexpr uint32_t kLimit = 1u << 16;

  explicit AdaptiveModel(
    int symbols, uint32_t increment = kIncrement, uint32_t limit = kLimit);

  int symbols() const { return int(freq_.size()); }
  uint32_t total() const { return total_; }
  uint32_t freq(int s) const { return freq_[size_t(s)]; }
  uint32_t cumulative(int s) const;  // sum of freq below s
  int find(uint32_t target, uint32_t& cumLow) const;
  void update(int s);

private:
  std::vector<uint32_t> freq_;
  uint32_t total_;
  uint32_t increment_;
  uint32_t limit_;
};

// 32-bit integer arithmetic coder with carry-free bit-plus-follow
// renormalisation.
class ArithmeticEncoder {
public:
  void encode(uint32_t cumLow, uint32_t cumHigh, uint32_t total);
  void encode(AdaptiveModel& model, int symbol);
  void encodeBits(uint32_t value, int bits);  // equiprobable, bits <= 16
  std::vector<uint8_t> finish();

private:
  void emit(int bit);

  uint64_t low_ = 0;
  uint64_t high_ = 0xFFFFFFFFull;
  uint64_t pending_ = 0;
  std::vector<uint8_t> bytes_;
  uint8_t cur_ = 0;
  int nbits_ = 0;
};

class ArithmeticDecoder {
public:
  explicit ArithmeticDecoder(std::span<const uint8_t> bytes);

  int decode(AdaptiveModel& model);
  uint32_t decodeBits(int bits);

private:
  uint32_t target(uint32_t total) const;
  void consume(uint32_t cumLow, uint32_t cumHigh, uint32_t total);
  int readBit();

  std::span<const uint8_t> bytes_;
  size_t bitPos_ = 0;
  uint64_t low_ = 0;
  uint64_t high_ = 0xFFFFFFFFull;
  uint64_t code_ = 0;
};

// Self-delimiting symbol stream: LEB128 symbol count followed by the coded
// payload, using a single adaptive model over [0, alphabet).
std::vector<uint8_t> acEncode(std::span<const uint32_t> symbols, int alphabet);
std::vector<uint32_t> acDecode(std::span<const uint8_t> bytes, int alphabet);

// LEB128 helpers shared by the codecs.
void putVarint(std::vector<uint8_t>& out, uint64_t v);
uint64_t getVarint(std::span<const uint8_t> in, size_t& pos);

}  // namespace spc
