#include "spc/entropy.h"

#include "spc/arith.h"
#include "spc/error.h"

#include <algorithm>
#include <bit>
#include <cstdlib>

namespace spc {

namespace {

  struct ChannelContexts {
    AdaptiveModel zero{2};
    AdaptiveModel sign{2};
    AdaptiveModel magnitude{kMagnitudeSymbols};
  };

}  // namespace

std::vector<uint8_t>
encodeResiduals(std::span<const int32_t> residuals, int channels)
{
  if (channels < 1)
    throwInternal("residual coder needs at least one channel");
  std::vector<ChannelContexts> ctx(static_cast<size_t>(channels));
  ArithmeticEncoder enc;
  for (size_t i = 0; i < residuals.size(); i++) {
    auto& c = ctx[i % size_t(channels)];
    int32_t y = residuals[i];
    enc.encode(c.zero, y != 0);
    if (y == 0)
      continue;
    enc.encode(c.sign, y < 0);
    int64_t mag = std::llabs(int64_t(y));
    if (mag > kMaxResidualMagnitude)
      throwData("residual magnitude " + std::to_string(mag) + " exceeds the coder range");
    if (mag - 1 < kMagnitudeEscape)
      enc.encode(c.magnitude, int(mag - 1));
    else {
      enc.encode(c.magnitude, kMagnitudeEscape);
      enc.encodeBits(uint32_t(mag - 1 - kMagnitudeEscape), 16);
    }
  }
  return enc.finish();
}

std::vector<int32_t>
decodeResiduals(std::span<const uint8_t> bytes, size_t count, int channels)
{
  if (channels < 1)
    throwInternal("residual coder needs at least one channel");
  std::vector<int32_t> out;
  if (count == 0)
    return out;
  if (count > (bytes.size() + 4) * 8 * uint64_t(AdaptiveModel::kLimit))
    throwData("residual count exceeds what the payload can encode");
  out.reserve(count);

  std::vector<ChannelContexts> ctx(static_cast<size_t>(channels));
  ArithmeticDecoder dec(bytes);
  for (size_t i = 0; i < count; i++) {
    auto& c = ctx[i % size_t(channels)];
    if (!dec.decode(c.zero)) {
      out.push_back(0);
      continue;
    }
    bool negative = dec.decode(c.sign);
    int32_t mag = dec.decode(c.magnitude) + 1;
    if (mag - 1 == kMagnitudeEscape)
      mag += int32_t(dec.decodeBits(16));
    out.push_back(negative ? -mag : mag);
  }
  return out;
}

//============================================================================

namespace {

  struct SlotModels {
    // index by available-count; count 0 and 1 never code anything
    std::vector<AdaptiveModel> byCount;
    SlotModels(bool direct)
    {
      for (int n = 0; n <= kCandidateSlots; n++)
        byCount.emplace_back(direct ? kCandidateSlots : std::max(n, 1));
    }
  };

  struct RecencyList {
    std::array<int8_t, kCandidateSlots> order{0, 1, 2, 3, 4, 5, 6};

    // Available slots in recency order.
    int restrict(uint8_t available, std::array<int8_t, kCandidateSlots>& out) const
    {
      int n = 0;
      for (int8_t s : order)
        if (available >> s & 1)
          out[size_t(n++)] = s;
      return n;
    }

    void touch(int8_t s)
    {
      auto it = std::find(order.begin(), order.end(), s);
      std::rotate(order.begin(), it, it + 1);
    }
  };

  void checkLengths(size_t a, size_t b)
  {
    if (a != b)
      throwInternal("slot and availability sequences differ in length");
  }

}  // namespace

std::vector<uint8_t>
encodeSlots(std::span<const int8_t> slots, std::span<const uint8_t> available)
{
  checkLengths(slots.size(), available.size());
  SlotModels models(false);
  RecencyList recent;
  ArithmeticEncoder enc;
  std::array<int8_t, kCandidateSlots> ordered;
  for (size_t i = 0; i < slots.size(); i++) {
    uint8_t avail = available[i] & 0x7F;
    int8_t s = slots[i];
    if (avail == 0) {
      if (s != kNoReference)
        throwInternal("reference slot chosen with no available candidates");
      continue;
    }
    if (s < 0 || s >= kCandidateSlots || !(avail >> s & 1))
      throwInternal("reference slot not in the available set");
    int n = recent.restrict(avail, ordered);
    int pos = int(std::find(ordered.begin(), ordered.begin() + n, s) - ordered.begin());
    if (n > 1)
      enc.encode(models.byCount[size_t(n)], pos);
    recent.touch(s);
  }
  return enc.finish();
}

std::vector<int8_t>
decodeSlots(std::span<const uint8_t> bytes, std::span<const uint8_t> available)
{
  SlotModels models(false);
  RecencyList recent;
  ArithmeticDecoder dec(bytes);
  std::array<int8_t, kCandidateSlots> ordered;
  std::vector<int8_t> out(available.size(), kNoReference);
  for (size_t i = 0; i < available.size(); i++) {
    uint8_t avail = available[i] & 0x7F;
    if (avail == 0)
      continue;
    int n = recent.restrict(avail, ordered);
    int pos = n > 1 ? dec.decode(models.byCount[size_t(n)]) : 0;
    int8_t s = ordered[size_t(pos)];
    out[i] = s;
    recent.touch(s);
  }
  return out;
}

std::vector<uint8_t>
encodeSlotsDirect(std::span<const int8_t> slots, std::span<const uint8_t> available)
{
  checkLengths(slots.size(), available.size());
  SlotModels models(true);
  ArithmeticEncoder enc;
  for (size_t i = 0; i < slots.size(); i++) {
    int n = std::popcount(unsigned(available[i] & 0x7F));
    if (n > 1)
      enc.encode(models.byCount[size_t(n)], slots[i]);
  }
  return enc.finish();
}

//----------------------------------------------------------------------------

namespace {

  std::vector<uint8_t> availability(const VoxelMask& pruned)
  {
    std::vector<uint8_t> out;
    for (size_t v = 0; v < pruned.dims.count(); v++)
      if (!pruned[v])
        out.push_back(availableSlots(pruned, v));
    return out;
  }

}  // namespace

std::vector<uint8_t>
encodeIndexes(const ReferenceGraph& graph, const VoxelMask& pruned)
{
  if (!(graph.dims == pruned.dims))
    throwInternal("index coder: graph and mask dims differ");
  std::vector<int8_t> slots;
  for (size_t v = 0; v < pruned.dims.count(); v++)
    if (!pruned[v])
      slots.push_back(graph.slot[v]);
  return encodeSlots(slots, availability(pruned));
}

ReferenceGraph
decodeIndexes(std::span<const uint8_t> bytes, const VoxelMask& pruned)
{
  auto slots = decodeSlots(bytes, availability(pruned));
  ReferenceGraph g = emptyReferenceGraph(pruned.dims);
  size_t next = 0;
  for (size_t v = 0; v < pruned.dims.count(); v++)
    if (!pruned[v])
      g.slot[v] = slots[next++];
  return g;
}

}  // namespace spc
