#include "spc/predict.h"

#include "spc/error.h"

#include <limits>

namespace spc {

std::vector<int32_t>
computeResiduals(
  const QuantizedGrid& qgrid, const ReferenceGraph& graph,
  const VoxelMask& pruned)
{
  if (!(qgrid.dims == graph.dims) || !(qgrid.dims == pruned.dims))
    throwData("residuals: grid, graph and mask dims differ");

  const size_t c = size_t(qgrid.channels);
  std::vector<int32_t> out;
  out.reserve((qgrid.dims.count() - pruned.popcount()) * c);
  for (size_t v = 0; v < qgrid.dims.count(); v++) {
    if (pruned[v])
      continue;
    const int32_t* cur = qgrid.voxel(v);
    size_t r = graph.reference(v);
    for (size_t ch = 0; ch < c; ch++)
      out.push_back(cur[ch] - (r == std::numeric_limits<size_t>::max() ? 0 : qgrid.voxel(r)[ch]));
  }
  return out;
}

QuantizedGrid
reconstructQuantized(
  std::span<const int32_t> coarse, const ReferenceGraph& graph,
  const VoxelMask& pruned, int channels)
{
  if (!(graph.dims == pruned.dims))
    throwData("reconstruct: graph and mask dims differ");
  const Dims& dims = pruned.dims;
  const size_t c = size_t(channels);
  if (coarse.size() != (dims.count() - pruned.popcount()) * c)
    throwData("reconstruct: coarse residual count does not match the prune mask");

  QuantizedGrid q{dims, channels, std::vector<int32_t>(dims.count() * c, 0)};
  std::vector<uint8_t> done(dims.count(), 0);
  size_t next = 0;
  for (size_t v = 0; v < dims.count(); v++) {
    if (pruned[v])
      continue;
    size_t r = graph.reference(v);
    const bool hasRef = r != std::numeric_limits<size_t>::max();
    if (hasRef && (r >= v || !done[r]))
      throwInternal("reference graph points at a voxel not yet reconstructed");
    int32_t* dst = q.voxel(v);
    for (size_t ch = 0; ch < c; ch++)
      dst[ch] = coarse[next++] + (hasRef ? q.voxel(r)[ch] : 0);
    done[v] = 1;
  }
  return q;
}

std::vector<int32_t>
computeFineResiduals(
  const VoxelGrid& post, const VoxelGrid& coarseRecon,
  const VoxelMask& critical, const QuantParams& params)
{
  std::vector<int32_t> out;
  for (size_t v = 0; v < post.voxelCount(); v++) {
    if (!critical[v])
      continue;
    auto a = post.voxel(v);
    auto b = coarseRecon.voxel(v);
    for (int c = 0; c < post.channels(); c++)
      out.push_back(quantize(a[c] - b[c], params.qFine, params.clampMag));
  }
  return out;
}

VoxelGrid
dequantizeGrid(
  const QuantizedGrid& qgrid, std::span<const int32_t> fine,
  const VoxelMask& critical, const QuantParams& params, const Bounds& bounds)
{
  VoxelGrid g(qgrid.dims, qgrid.channels, bounds);
  auto values = g.values();
  for (size_t i = 0; i < values.size(); i++)
    values[i] = dequantize(qgrid.values[i], params.qStep);

  if (fine.empty())
    return g;
  if (fine.size() != critical.popcount() * size_t(qgrid.channels))
    throwData("fine residual count does not match the critical mask");
  size_t next = 0;
  for (size_t v = 0; v < g.voxelCount(); v++) {
    if (!critical[v])
      continue;
    auto dst = g.voxel(v);
    for (int c = 0; c < qgrid.channels; c++)
      dst[c] += dequantize(fine[next++], params.qFine);
  }
  return g;
}

VoxelGrid
reconstruct(
  const ResidualPlanes& planes, const ReferenceGraph& graph,
  const VoxelMask& pruned, const VoxelMask& critical,
  const QuantParams& params, const Bounds& bounds)
{
  auto q = reconstructQuantized(planes.coarse, graph, pruned, planes.channels);
  return dequantizeGrid(q, planes.fine, critical, params, bounds);
}

}  // namespace spc
