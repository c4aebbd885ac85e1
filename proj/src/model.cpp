#include "spc/model.h"

#include "spc/error.h"

#include <algorithm>

namespace spc {

void
VoxelModel::validate() const
{
  if (density.channels() != 1)
    throwData("density grid must have exactly one channel");
  if (!(density.dims() == features.dims()) || !(density.bounds() == features.bounds()))
    throwData("density and feature grids must share dims and bounds");
  if (net.shape().featureChannels != features.channels())
    throwData("colour net input does not match the feature channel count");
}

void
ModelGradients::clear()
{
  std::fill(density.begin(), density.end(), 0.0);
  std::fill(features.begin(), features.end(), 0.0);
  std::fill(net.begin(), net.end(), 0.0);
}

void
ModelGradients::add(const ModelGradients& other)
{
  for (size_t i = 0; i < density.size(); i++)
    density[i] += other.density[i];
  for (size_t i = 0; i < features.size(); i++)
    features[i] += other.features[i];
  for (size_t i = 0; i < net.size(); i++)
    net[i] += other.net[i];
}

void
ModelGradients::scale(double s)
{
  for (auto& g : density)
    g *= s;
  for (auto& g : features)
    g *= s;
  for (auto& g : net)
    g *= s;
}

}  // namespace spc
