#pragma once

#include "spc/grid.h"
#include "spc/quant.h"

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace spc {

constexpr int kCandidateSlots = 7;
constexpr int8_t kNoReference = -1;

// Causal neighbours of a voxel in scan order: the three face, three edge
// and one corner neighbours of the preceding unit cube, in slot order.
constexpr std::array<std::array<int, 3>, kCandidateSlots> kCandidateOffsets{{
  {-1, 0, 0},
  {0, -1, 0},
  {0, 0, -1},
  {-1, -1, 0},
  {-1, 0, -1},
  {0, -1, -1},
  {-1, -1, -1},
}};

struct CandidateSlot {
  std::array<int, 3> coord;
  size_t voxel = 0;
  bool available = false;
};

// Slots outside the volume or on pruned voxels are unavailable. Decidable
// from the prune mask alone.
std::array<CandidateSlot, kCandidateSlots>
candidates(const VoxelMask& pruned, std::array<int, 3> coord);

// Bit s set when slot s is available.
uint8_t availableSlots(const VoxelMask& pruned, size_t voxel);

struct ReferenceGraph {
  Dims dims;
  std::vector<int8_t> slot;  // per voxel; kNoReference for pruned voxels too

  // Voxel referenced by v, or SIZE_MAX when v has no reference.
  size_t reference(size_t v) const;
  // (voxel, reference) pairs in scan order.
  std::vector<std::pair<size_t, size_t>> edges() const;
  size_t edgeCount() const;

  friend bool operator==(const ReferenceGraph&, const ReferenceGraph&) = default;
};

// Per unpruned voxel, the available candidate with the smallest SAD over
// quantized features; ties go to the lowest slot.
ReferenceGraph
buildReferenceGraph(const QuantizedGrid& qgrid, const VoxelMask& pruned);

// Every voxel predicts from zero; used when prediction is disabled.
ReferenceGraph emptyReferenceGraph(const Dims& dims);

}  // namespace spc
