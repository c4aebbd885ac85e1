#pragma once

#include "spc/camera.h"
#include "spc/grid.h"
#include "spc/model.h"
#include "spc/render.h"

namespace spc {

// score(v) = sum over ray samples of (compositing weight) x (trilinear
// weight of v at the sample).
ImportanceField computeImportance(
  const VoxelModel& model, const RaySet& rays, const RenderOptions& opts);

}  // namespace spc
