#include "spc/importance.h"

#include "spc/error.h"
#include "spc/parallel.h"

namespace spc {

ImportanceField
computeImportance(
  const VoxelModel& model, const RaySet& rays, const RenderOptions& opts)
{
  if (rays.empty())
    throwData("importance needs at least one ray");
  model.validate();

  const size_t n = model.dims().count();
  const int parts = std::min<int>(kReductionPartitions, int(rays.size()));
  std::vector<std::vector<double>> partial(size_t(parts), std::vector<double>(n, 0.0));

  parallelPartitions(rays.size(), parts, [&](size_t begin, size_t end, int w) {
    RayTape tape;
    auto& acc = partial[size_t(w)];
    for (size_t i = begin; i < end; i++) {
      traceRay(model, rays[i], opts, &tape);
      for (const auto& s : tape.samples) {
        double weight = s.transmittance * s.alpha;
        for (int c = 0; c < 8; c++)
          acc[s.corners.voxel[c]] += weight * s.corners.weight[c];
      }
    }
  });

  ImportanceField imp{model.dims(), std::move(partial[0])};
  for (size_t w = 1; w < partial.size(); w++)
    for (size_t v = 0; v < n; v++)
      imp.score[v] += partial[w][v];
  return imp;
}

}  // namespace spc
