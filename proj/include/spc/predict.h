#pragma once

#include "spc/grid.h"
#include "spc/quant.h"
#include "spc/refgraph.h"

#include <cstdint>
#include <vector>

namespace spc {

// Integer residual layers in scan order, channel innermost.
struct ResidualPlanes {
  int channels = 0;
  std::vector<int32_t> coarse;  // one vector per unpruned voxel
  std::vector<int32_t> fine;    // one vector per critical voxel

  friend bool operator==(const ResidualPlanes&, const ResidualPlanes&) = default;
};

// y = x - x_ref for every unpruned voxel (x_ref = 0 without a reference).
std::vector<int32_t> computeResiduals(
  const QuantizedGrid& qgrid, const ReferenceGraph& graph,
  const VoxelMask& pruned);

// Inverse of computeResiduals, scan order.
QuantizedGrid reconstructQuantized(
  std::span<const int32_t> coarse, const ReferenceGraph& graph,
  const VoxelMask& pruned, int channels);

// Refinement for critical voxels: quantize(post - coarseRecon, qFine).
std::vector<int32_t> computeFineResiduals(
  const VoxelGrid& post, const VoxelGrid& coarseRecon,
  const VoxelMask& critical, const QuantParams& params);

// Dequantized coarse layer plus fine refinement on critical voxels; pruned
// voxels are zero.
VoxelGrid dequantizeGrid(
  const QuantizedGrid& qgrid, std::span<const int32_t> fine,
  const VoxelMask& critical, const QuantParams& params, const Bounds& bounds);

VoxelGrid reconstruct(
  const ResidualPlanes& planes, const ReferenceGraph& graph,
  const VoxelMask& pruned, const VoxelMask& critical,
  const QuantParams& params, const Bounds& bounds);

}  // namespace spc
