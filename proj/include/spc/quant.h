#pragma once

#include "spc/grid.h"

#include <cstdint>
#include <vector>

namespace spc {

struct QuantParams {
  double qStep = 0.5;    // coarse step
  double qFine = 0.125;  // refinement step for critical voxels
  int clampMag = 255;    // max |quantized index|

  void validate() const;
};

// round-half-away-from-zero(x / q), clamped to [-clampMag, clampMag].
int32_t quantize(double x, double q, int clampMag, bool* clamped = nullptr);
double dequantize(int32_t k, double q);

// Training surrogate for quantize: x / q + u with u ~ U(-1/2, 1/2).
// d(out)/dx is exactly 1/q.
inline double
noiseQuantize(double x, double q, double u)
{
  return x / q + u;
}

// Counter-based uniform(-1/2, 1/2) generator. Draw n of stream s depends
// only on (seed, s, n), so draws are reproducible irrespective of how
// they are spread over workers.
class NoiseSource {
public:
  explicit NoiseSource(uint64_t seed, uint64_t stream = 0)
    : seed_(seed), stream_(stream)
  {}

  double at(uint64_t counter) const;
  double next() { return at(counter_++); }
  void seek(uint64_t counter) { counter_ = counter; }

private:
  uint64_t seed_;
  uint64_t stream_;
  uint64_t counter_ = 0;
};

// Integer feature grid. Pruned voxels hold zero.
struct QuantizedGrid {
  Dims dims;
  int channels = 0;
  std::vector<int32_t> values;

  const int32_t* voxel(size_t v) const { return values.data() + v * size_t(channels); }
  int32_t* voxel(size_t v) { return values.data() + v * size_t(channels); }

  friend bool operator==(const QuantizedGrid&, const QuantizedGrid&) = default;
};

// Converts an integer-valued real grid; throws on any fractional value.
QuantizedGrid toQuantizedGrid(const VoxelGrid& grid);

QuantizedGrid quantizeGrid(
  const VoxelGrid& grid, double q, int clampMag, const VoxelMask& pruned,
  size_t* clampEvents = nullptr);

}  // namespace spc
