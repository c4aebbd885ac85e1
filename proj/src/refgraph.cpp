#include "spc/refgraph.h"

#include "spc/error.h"
#include "spc/parallel.h"

#include <cstdlib>
#include <limits>

namespace spc {

std::array<CandidateSlot, kCandidateSlots>
candidates(const VoxelMask& pruned, std::array<int, 3> coord)
{
  const Dims& d = pruned.dims;
  std::array<CandidateSlot, kCandidateSlots> out;
  for (int s = 0; s < kCandidateSlots; s++) {
    auto& c = out[size_t(s)];
    for (int a = 0; a < 3; a++)
      c.coord[size_t(a)] = coord[size_t(a)] + kCandidateOffsets[size_t(s)][size_t(a)];
    if (!d.contains(c.coord[0], c.coord[1], c.coord[2]))
      continue;
    c.voxel = d.index(c.coord[0], c.coord[1], c.coord[2]);
    c.available = !pruned[c.voxel];
  }
  return out;
}

uint8_t
availableSlots(const VoxelMask& pruned, size_t voxel)
{
  auto cands = candidates(pruned, pruned.dims.coord(voxel));
  uint8_t bits = 0;
  for (int s = 0; s < kCandidateSlots; s++)
    if (cands[size_t(s)].available)
      bits |= uint8_t(1u << s);
  return bits;
}

//============================================================================

size_t
ReferenceGraph::reference(size_t v) const
{
  int8_t s = slot[v];
  if (s == kNoReference)
    return std::numeric_limits<size_t>::max();
  if (s < 0 || s >= kCandidateSlots)
    throwInternal("reference slot out of range");
  auto c = dims.coord(v);
  const auto& off = kCandidateOffsets[size_t(s)];
  int i = c[0] + off[0], j = c[1] + off[1], k = c[2] + off[2];
  if (!dims.contains(i, j, k))
    throwInternal("reference slot points outside the volume");
  return dims.index(i, j, k);
}

std::vector<std::pair<size_t, size_t>>
ReferenceGraph::edges() const
{
  std::vector<std::pair<size_t, size_t>> out;
  for (size_t v = 0; v < slot.size(); v++)
    if (slot[v] != kNoReference)
      out.emplace_back(v, reference(v));
  return out;
}

size_t
ReferenceGraph::edgeCount() const
{
  size_t n = 0;
  for (int8_t s : slot)
    n += s != kNoReference;
  return n;
}

ReferenceGraph
buildReferenceGraph(const QuantizedGrid& qgrid, const VoxelMask& pruned)
{
  if (!(qgrid.dims == pruned.dims))
    throwData("reference graph: grid and mask dims differ");

  ReferenceGraph g{qgrid.dims, std::vector<int8_t>(qgrid.dims.count(), kNoReference)};
  const int channels = qgrid.channels;

  // Each voxel's choice reads only quantized values, so chunks are
  // independent and the result does not depend on the split.
  parallelChunks(g.slot.size(), workerCount(), [&](size_t begin, size_t end, int) {
    for (size_t v = begin; v < end; v++) {
      if (pruned[v])
        continue;
      auto cands = candidates(pruned, qgrid.dims.coord(v));
      const int32_t* cur = qgrid.voxel(v);
      int64_t best = std::numeric_limits<int64_t>::max();
      int8_t bestSlot = kNoReference;
      for (int s = 0; s < kCandidateSlots; s++) {
        if (!cands[size_t(s)].available)
          continue;
        const int32_t* ref = qgrid.voxel(cands[size_t(s)].voxel);
        int64_t sad = 0;
        for (int c = 0; c < channels; c++)
          sad += std::llabs(int64_t(cur[c]) - int64_t(ref[c]));
        if (sad < best) {
          best = sad;
          bestSlot = int8_t(s);
        }
      }
      g.slot[v] = bestSlot;
    }
  });
  return g;
}

ReferenceGraph
emptyReferenceGraph(const Dims& dims)
{
  return {dims, std::vector<int8_t>(dims.count(), kNoReference)};
}

}  // namespace spc
