#include "spc/arith.h"

#include "spc/error.h"

namespace spc {

namespace {

  constexpr uint64_t kTop = 0xFFFFFFFFull;
  constexpr uint64_t kHalf = 0x80000000ull;
  constexpr uint64_t kQuarter = 0x40000000ull;

  // Bytes the decoder may read past the end of a valid stream: the initial
  // 32-bit code fill.
  constexpr size_t kTailSlack = 4;

}  // namespace

//============================================================================

AdaptiveModel::AdaptiveModel(int symbols, uint32_t increment, uint32_t limit)
  : freq_(size_t(symbols), 1u),
    total_(uint32_t(symbols)),
    increment_(increment),
    limit_(limit)
{
  if (symbols < 1 || uint32_t(symbols) > limit)
    throwInternal("adaptive model alphabet out of range");
}

uint32_t
AdaptiveModel::cumulative(int s) const
{
  uint32_t c = 0;
  for (int i = 0; i < s; i++)
    c += freq_[size_t(i)];
  return c;
}

int
AdaptiveModel::find(uint32_t target, uint32_t& cumLow) const
{
  uint32_t c = 0;
  for (size_t i = 0; i < freq_.size(); i++) {
    if (target < c + freq_[i]) {
      cumLow = c;
      return int(i);
    }
    c += freq_[i];
  }
  cumLow = c - freq_.back();
  return int(freq_.size()) - 1;
}

void
AdaptiveModel::update(int s)
{
  freq_[size_t(s)] += increment_;
  total_ += increment_;
  if (total_ > limit_) {
    total_ = 0;
    for (auto& f : freq_) {
      f = (f + 1) / 2;
      total_ += f;
    }
  }
}

//============================================================================

void
ArithmeticEncoder::emit(int bit)
{
  cur_ = uint8_t(cur_ << 1 | bit);
  if (++nbits_ == 8) {
    bytes_.push_back(cur_);
    cur_ = 0;
    nbits_ = 0;
  }
}

void
ArithmeticEncoder::encode(uint32_t cumLow, uint32_t cumHigh, uint32_t total)
{
  uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cumHigh / total - 1;
  low_ = low_ + range * cumLow / total;

  for (;;) {
    if (high_ < kHalf) {
      emit(0);
      for (; pending_; pending_--)
        emit(1);
    }
    else if (low_ >= kHalf) {
      emit(1);
      for (; pending_; pending_--)
        emit(0);
      low_ -= kHalf;
      high_ -= kHalf;
    }
    else if (low_ >= kQuarter && high_ < kHalf + kQuarter) {
      pending_++;
      low_ -= kQuarter;
      high_ -= kQuarter;
    }
    else
      break;
    low_ = 2 * low_;
    high_ = 2 * high_ + 1;
  }
}

void
ArithmeticEncoder::encode(AdaptiveModel& model, int symbol)
{
  uint32_t lo = model.cumulative(symbol);
  encode(lo, lo + model.freq(symbol), model.total());
  model.update(symbol);
}

void
ArithmeticEncoder::encodeBits(uint32_t value, int bits)
{
  encode(value, value + 1, 1u << bits);
}

std::vector<uint8_t>
ArithmeticEncoder::finish()
{
  pending_++;
  if (low_ < kQuarter) {
    emit(0);
    for (; pending_; pending_--)
      emit(1);
  }
  else {
    emit(1);
    for (; pending_; pending_--)
      emit(0);
  }
  while (nbits_)
    emit(0);
  return std::move(bytes_);
}

//============================================================================

ArithmeticDecoder::ArithmeticDecoder(std::span<const uint8_t> bytes)
  : bytes_(bytes)
{
  for (int i = 0; i < 32; i++)
    code_ = code_ << 1 | uint64_t(readBit());
}

int
ArithmeticDecoder::readBit()
{
  size_t byte = bitPos_ >> 3;
  if (byte >= bytes_.size() + kTailSlack)
    throwData(
      "arithmetic decoder ran past the end of its input at byte offset "
      + std::to_string(bytes_.size()));
  int bit = byte < bytes_.size() ? (bytes_[byte] >> (7 - (bitPos_ & 7))) & 1 : 0;
  bitPos_++;
  return bit;
}

uint32_t
ArithmeticDecoder::target(uint32_t total) const
{
  uint64_t range = high_ - low_ + 1;
  uint64_t t = ((code_ - low_ + 1) * total - 1) / range;
  if (t >= total)
    throwData("arithmetic decoder state corrupt at byte offset " + std::to_string(bitPos_ / 8));
  return uint32_t(t);
}

void
ArithmeticDecoder::consume(uint32_t cumLow, uint32_t cumHigh, uint32_t total)
{
  uint64_t range = high_ - low_ + 1;
  high_ = low_ + range * cumHigh / total - 1;
  low_ = low_ + range * cumLow / total;

  for (;;) {
    if (high_ < kHalf) {
    }
    else if (low_ >= kHalf) {
      low_ -= kHalf;
      high_ -= kHalf;
      code_ -= kHalf;
    }
    else if (low_ >= kQuarter && high_ < kHalf + kQuarter) {
      low_ -= kQuarter;
      high_ -= kQuarter;
      code_ -= kQuarter;
    }
    else
      break;
    low_ = 2 * low_;
    high_ = 2 * high_ + 1;
    code_ = (2 * code_ + uint64_t(readBit())) & kTop;
  }
}

int
ArithmeticDecoder::decode(AdaptiveModel& model)
{
  uint32_t t = target(model.total());
  uint32_t lo = 0;
  int s = model.find(t, lo);
  consume(lo, lo + model.freq(s), model.total());
  model.update(s);
  return s;
}

uint32_t
ArithmeticDecoder::decodeBits(int bits)
{
  uint32_t total = 1u << bits;
  uint32_t t = target(total);
  consume(t, t + 1, total);
  return t;
}

//============================================================================

void
putVarint(std::vector<uint8_t>& out, uint64_t v)
{
  while (v >= 0x80) {
    out.push_back(uint8_t(v | 0x80));
    v >>= 7;
  }
  out.push_back(uint8_t(v));
}

uint64_t
getVarint(std::span<const uint8_t> in, size_t& pos)
{
  uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= in.size())
      throwData("truncated varint at byte offset " + std::to_string(pos));
    uint8_t b = in[pos++];
    v |= uint64_t(b & 0x7F) << shift;
    if (!(b & 0x80))
      return v;
  }
  throwData("overlong varint at byte offset " + std::to_string(pos));
}

std::vector<uint8_t>
acEncode(std::span<const uint32_t> symbols, int alphabet)
{
  std::vector<uint8_t> out;
  putVarint(out, symbols.size());
  if (symbols.empty())
    return out;

  AdaptiveModel model(alphabet);
  ArithmeticEncoder enc;
  for (uint32_t s : symbols) {
    if (s >= uint32_t(alphabet))
      throwData("symbol " + std::to_string(s) + " outside alphabet");
    enc.encode(model, int(s));
  }
  auto payload = enc.finish();
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<uint32_t>
acDecode(std::span<const uint8_t> bytes, int alphabet)
{
  size_t pos = 0;
  uint64_t n = getVarint(bytes, pos);
  std::vector<uint32_t> out;
  if (n == 0)
    return out;
  // a symbol costs at least -log2(1 - 1/kLimit) bits, so no payload can
  // carry more than kLimit symbols per bit
  if (n > (bytes.size() - pos + kTailSlack) * 8 * uint64_t(AdaptiveModel::kLimit))
    throwData("symbol count exceeds what the payload can encode");

  AdaptiveModel model(alphabet);
  ArithmeticDecoder dec(bytes.subspan(pos));
  out.reserve(size_t(n));
  for (uint64_t i = 0; i < n; i++)
    out.push_back(uint32_t(dec.decode(model)));
  return out;
}

}  // namespace spc
