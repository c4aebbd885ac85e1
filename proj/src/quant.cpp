#include "spc/quant.h"

#include "spc/error.h"

#include <cmath>

namespace spc {

void
QuantParams::validate() const
{
  if (!(qStep > 0) || !(qFine > 0) || qFine > qStep)
    throwUsage("quantization steps must satisfy 0 < q_fine <= q_step");
  if (clampMag < 1)
    throwUsage("clamp magnitude must be at least 1");
}

int32_t
quantize(double x, double q, int clampMag, bool* clamped)
{
  double r = std::round(x / q);  // halves round away from zero
  bool hit = false;
  if (r > clampMag) {
    r = clampMag;
    hit = true;
  }
  else if (r < -clampMag) {
    r = -clampMag;
    hit = true;
  }
  if (clamped)
    *clamped = hit;
  return int32_t(r);
}

double
dequantize(int32_t k, double q)
{
  return double(k) * q;
}

double
NoiseSource::at(uint64_t counter) const
{
  // splitmix64 finaliser over a mix of seed, stream and counter
  uint64_t z = seed_ * 0x9E3779B97F4A7C15ull ^ (stream_ + 0x632BE59BD9B4E019ull) * 0xBF58476D1CE4E5B9ull;
  z += counter * 0x9E3779B97F4A7C15ull;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  z ^= z >> 31;
  return double(z >> 11) * 0x1.0p-53 - 0.5;
}

QuantizedGrid
toQuantizedGrid(const VoxelGrid& grid)
{
  QuantizedGrid out{grid.dims(), grid.channels(), {}};
  out.values.reserve(grid.values().size());
  for (size_t i = 0; i < grid.values().size(); i++) {
    double x = grid.values()[i];
    if (x != std::trunc(x) || std::fabs(x) > 2147483647.0)
      throwData("grid value " + std::to_string(i) + " is not an integer");
    out.values.push_back(int32_t(x));
  }
  return out;
}

QuantizedGrid
quantizeGrid(
  const VoxelGrid& grid, double q, int clampMag, const VoxelMask& pruned,
  size_t* clampEvents)
{
  QuantizedGrid out{grid.dims(), grid.channels(), {}};
  out.values.assign(grid.values().size(), 0);
  size_t events = 0;
  for (size_t v = 0; v < grid.voxelCount(); v++) {
    if (pruned[v])
      continue;
    auto src = grid.voxel(v);
    int32_t* dst = out.voxel(v);
    for (int c = 0; c < grid.channels(); c++) {
      bool clamped = false;
      dst[c] = quantize(src[c], q, clampMag, &clamped);
      events += clamped;
    }
  }
  if (clampEvents)
    *clampEvents = events;
  return out;
}

}  // namespace spc
