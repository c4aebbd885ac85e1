#pragma once

// Shared fixtures and independent reference implementations for the tests.

#include "spc/colornet.h"
#include "spc/model.h"
#include "spc/render.h"

#include <cmath>
#include <random>
#include <vector>

namespace spc::testing {

inline VoxelModel
randomModel(Dims dims, int channels, uint64_t seed, double densityMean = 0.0,
            double densitySpread = 2.0, int hidden = 16)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  VoxelModel m;
  m.density = VoxelGrid(dims, 1, {});
  m.features = VoxelGrid(dims, channels, {});
  for (auto& v : m.density.values())
    v = densityMean + densitySpread * n01(rng);
  for (auto& v : m.features.values())
    v = n01(rng);
  ColorNetShape shape;
  shape.featureChannels = channels;
  shape.hidden = hidden;
  m.net = ColorNet(shape);
  m.net.initRandom(rng);
  m.densityShift = -1.0;
  return m;
}

// Trilinear sample computed directly from voxel centre positions.
inline std::vector<double>
trilinearOracle(const VoxelGrid& g, Vec3 p)
{
  const int n[3] = {g.dims().x, g.dims().y, g.dims().z};
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; a++) {
    double u = (p[a] - g.bounds().lo[a]) / (g.bounds().hi[a] - g.bounds().lo[a]) * (n[a] - 1);
    if (n[a] == 1) {
      base[a] = 0;
      frac[a] = 0;
      continue;
    }
    base[a] = std::min(int(std::floor(u)), n[a] - 2);
    frac[a] = u - base[a];
  }
  std::vector<double> out(size_t(g.channels()), 0.0);
  for (int dz = 0; dz < 2; dz++)
    for (int dy = 0; dy < 2; dy++)
      for (int dx = 0; dx < 2; dx++) {
        double w = (dx ? frac[0] : 1 - frac[0]) * (dy ? frac[1] : 1 - frac[1])
                   * (dz ? frac[2] : 1 - frac[2]);
        if (w == 0)
          continue;
        int i = std::min(base[0] + dx, n[0] - 1);
        int j = std::min(base[1] + dy, n[1] - 1);
        int k = std::min(base[2] + dz, n[2] - 1);
        auto v = g.voxel(g.dims().index(i, j, k));
        for (int c = 0; c < g.channels(); c++)
          out[size_t(c)] += w * v[size_t(c)];
      }
  return out;
}

struct OracleSample {
  Vec3 position;
  double weight;  // T * alpha
};

struct OracleRay {
  Vec3 color;
  double residualTransmittance = 1.0;
  std::vector<OracleSample> samples;
};

// Straight-line compositing with every sample evaluated (no thresholds).
inline OracleRay
traceOracle(const VoxelModel& m, const Ray& ray, const RenderOptions& opts)
{
  OracleRay out;
  out.color = opts.background;
  const auto& b = m.density.bounds();
  double t0 = opts.nearT, t1 = opts.farT;
  for (int a = 0; a < 3; a++) {
    if (ray.dir[a] == 0) {
      if (ray.origin[a] < b.lo[a] || ray.origin[a] > b.hi[a])
        return out;
      continue;
    }
    double ta = (b.lo[a] - ray.origin[a]) / ray.dir[a];
    double tb = (b.hi[a] - ray.origin[a]) / ray.dir[a];
    t0 = std::max(t0, std::min(ta, tb));
    t1 = std::min(t1, std::max(ta, tb));
  }
  if (t0 > t1)
    return out;

  double spacing = 1e300;
  const int n[3] = {m.dims().x, m.dims().y, m.dims().z};
  for (int a = 0; a < 3; a++)
    if (n[a] > 1)
      spacing = std::min(spacing, (b.hi[a] - b.lo[a]) / (n[a] - 1));
  double step = opts.stepVoxels * spacing;

  const auto& shape = m.net.shape();
  std::vector<double> input(size_t(shape.inputSize()));
  encodeView(ray.dir, shape.viewBands,
             std::span<double>(input).subspan(size_t(shape.featureChannels)));

  Vec3 color{0, 0, 0};
  double T = 1.0;
  for (int k = 0;; k++) {
    double t = t0 + k * step;
    if (t > t1)
      break;
    Vec3 p = ray.origin + ray.dir * t;
    for (int a = 0; a < 3; a++)
      p[a] = std::clamp(p[a], b.lo[a], b.hi[a]);
    double raw = trilinearOracle(m.density, p)[0];
    double sigma = std::log1p(std::exp(raw + m.densityShift));
    double alpha = 1.0 - std::exp(-sigma * opts.stepVoxels);
    auto f = trilinearOracle(m.features, p);
    std::copy(f.begin(), f.end(), input.begin());
    Vec3 c = m.net.evaluate(input);
    color = color + c * (T * alpha);
    out.samples.push_back({p, T * alpha});
    T *= 1.0 - alpha;
  }
  out.residualTransmittance = T;
  out.color = color + opts.background * T;
  return out;
}

inline double
maxAbsDiff(std::span<const double> a, std::span<const double> b)
{
  double d = 0;
  for (size_t i = 0; i < a.size(); i++)
    d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace spc::testing
