#pragma once

#include "spc/grid.h"
#include "spc/refgraph.h"

#include <cstdint>
#include <span>
#include <vector>

namespace spc {

//============================================================================
// Residual binarisation: zero flag, sign, then magnitude-1 in a 255-ary
// model whose last symbol escapes to a 16-bit raw remainder. Each channel
// owns its own set of contexts.

constexpr int kMagnitudeSymbols = 255;
constexpr int kMagnitudeEscape = kMagnitudeSymbols - 1;
constexpr int32_t kMaxResidualMagnitude = kMagnitudeEscape + 0xFFFF + 1;

std::vector<uint8_t>
encodeResiduals(std::span<const int32_t> residuals, int channels);

std::vector<int32_t>
decodeResiduals(std::span<const uint8_t> bytes, size_t count, int channels);

//============================================================================
// Reference indexes. A most-recent-first list of the slot ids is kept; each
// voxel codes the position of its slot within the list restricted to the
// available slots, with one model per available-count. Voxels with a single
// available slot code nothing; voxels with none are skipped.

std::vector<uint8_t> encodeSlots(
  std::span<const int8_t> slots, std::span<const uint8_t> available);

std::vector<int8_t> decodeSlots(
  std::span<const uint8_t> bytes, std::span<const uint8_t> available);

// Baseline without reordering: the slot id itself, one model per
// available-count.
std::vector<uint8_t> encodeSlotsDirect(
  std::span<const int8_t> slots, std::span<const uint8_t> available);

// Graph-level wrappers: availability is derived from the prune mask.
std::vector<uint8_t>
encodeIndexes(const ReferenceGraph& graph, const VoxelMask& pruned);
ReferenceGraph
decodeIndexes(std::span<const uint8_t> bytes, const VoxelMask& pruned);

}  // namespace spc
