#pragma once

#include "spc/colornet.h"
#include "spc/grid.h"

namespace spc {

// Explicit voxel-grid radiance field: a raw (pre-activation) density grid,
// a C-channel feature grid over the same lattice, and the colour net.
struct VoxelModel {
  VoxelGrid density;
  VoxelGrid features;
  ColorNet net;
  double densityShift = 0.0;

  const Dims& dims() const { return features.dims(); }
  void validate() const;
};

struct ModelGradients {
  std::vector<double> density;
  std::vector<double> features;
  std::vector<double> net;

  ModelGradients() = default;
  explicit ModelGradients(const VoxelModel& m)
    : density(m.density.values().size(), 0.0),
      features(m.features.values().size(), 0.0),
      net(m.net.paramCount(), 0.0)
  {}

  void clear();
  void add(const ModelGradients& other);
  void scale(double s);
};

}  // namespace spc
