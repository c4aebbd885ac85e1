#include "spc/rate.h"

#include "spc/error.h"

#include <cmath>

namespace spc {

namespace {

  double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

}  // namespace

RateTerm
rateMain(const VoxelGrid& features, const ReferenceGraph& graph)
{
  if (!(features.dims() == graph.dims))
    throwData("rate: grid and graph dims differ");
  size_t edges = graph.edgeCount();
  if (edges == 0)
    throwData("rate: reference graph has no edges");

  const int channels = features.channels();
  const double inv = 1.0 / double(edges);
  RateTerm out{0.0, std::vector<double>(features.values().size(), 0.0)};
  long double sum = 0;
  for (size_t v = 0; v < graph.slot.size(); v++) {
    if (graph.slot[v] == kNoReference)
      continue;
    size_t r = graph.reference(v);
    auto a = features.voxel(v);
    auto b = features.voxel(r);
    double* ga = &out.grad[v * size_t(channels)];
    double* gb = &out.grad[r * size_t(channels)];
    for (int c = 0; c < channels; c++) {
      double d = a[c] - b[c];
      sum += std::fabs(d);
      double s = sign(d) * inv;
      ga[c] += s;
      gb[c] -= s;
    }
  }
  out.value = double(sum / (long double)edges);
  return out;
}

RateTerm
ratePost(
  const VoxelGrid& features, const VoxelGrid& coarseRecon,
  const VoxelMask& critical)
{
  if (!(features.dims() == coarseRecon.dims()) || !(features.dims() == critical.dims))
    throwData("post rate: grid and mask dims differ");
  size_t count = critical.popcount();
  if (count == 0)
    throwData("post rate: critical set is empty");

  const int channels = features.channels();
  const double inv = 1.0 / double(count);
  RateTerm out{0.0, std::vector<double>(features.values().size(), 0.0)};
  long double sum = 0;
  for (size_t v = 0; v < features.voxelCount(); v++) {
    if (!critical[v])
      continue;
    auto a = features.voxel(v);
    auto b = coarseRecon.voxel(v);
    double* g = &out.grad[v * size_t(channels)];
    for (int c = 0; c < channels; c++) {
      double d = a[c] - b[c];
      sum += std::fabs(d);
      g[c] = sign(d) * inv;
    }
  }
  out.value = double(sum / (long double)count);
  return out;
}

}  // namespace spc
