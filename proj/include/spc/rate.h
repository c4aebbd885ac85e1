#pragma once

#include "spc/grid.h"
#include "spc/refgraph.h"

#include <vector>

namespace spc {

enum class RateStage
{
  kMain,
  kPost,
};

struct RateConfig {
  double lambda = 1e-4;
  RateStage stage = RateStage::kMain;
};

struct RateTerm {
  double value = 0.0;
  std::vector<double> grad;  // d(value)/d(feature), same layout as the grid
};

// Mean L1 difference across reference edges:
//   R = 1/|G| * sum_{(i,j) in G} |v_i - v_j|_1
// The L1 subgradient at an exact tie is 0.
RateTerm rateMain(const VoxelGrid& features, const ReferenceGraph& graph);

// Mean L1 distance of critical voxels to the frozen coarse reconstruction:
//   R = 1/|C| * sum_{i in C} |v_i - coarse_i|_1
RateTerm ratePost(
  const VoxelGrid& features, const VoxelGrid& coarseRecon,
  const VoxelMask& critical);

// Lagrangian objective lambda * R + D.
inline double
rdLoss(double rate, double distortion, const RateConfig& cfg)
{
  return cfg.lambda * rate + distortion;
}

}  // namespace spc
