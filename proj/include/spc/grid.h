#pragma once

#include "spc/vec3.h"

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spc {

//============================================================================
// Dense voxel storage. Scan order is lexicographic with x fastest, then y,
// then z; channels are innermost.

struct Dims {
  int x = 0, y = 0, z = 0;

  size_t count() const { return size_t(x) * size_t(y) * size_t(z); }
  size_t index(int i, int j, int k) const
  {
    return (size_t(k) * size_t(y) + size_t(j)) * size_t(x) + size_t(i);
  }
  bool contains(int i, int j, int k) const
  {
    return i >= 0 && j >= 0 && k >= 0 && i < x && j < y && k < z;
  }
  std::array<int, 3> coord(size_t idx) const
  {
    int i = int(idx % size_t(x));
    idx /= size_t(x);
    return {i, int(idx % size_t(y)), int(idx / size_t(y))};
  }

  friend bool operator==(const Dims&, const Dims&) = default;
};

struct Bounds {
  Vec3 lo{-1, -1, -1};
  Vec3 hi{1, 1, 1};

  bool contains(Vec3 p) const
  {
    for (int a = 0; a < 3; a++)
      if (!(p[a] >= lo[a] && p[a] <= hi[a]))
        return false;
    return true;
  }
  Vec3 clamp(Vec3 p) const;

  friend bool operator==(const Bounds&, const Bounds&) = default;
};

// The eight voxels surrounding a point and their interpolation weights.
struct TrilinearCorners {
  std::array<size_t, 8> voxel;
  std::array<double, 8> weight;
};

class VoxelGrid {
public:
  VoxelGrid() = default;
  VoxelGrid(Dims dims, int channels, Bounds bounds);
  VoxelGrid(Dims dims, int channels, Bounds bounds, std::vector<double> values);

  const Dims& dims() const { return dims_; }
  int channels() const { return channels_; }
  const Bounds& bounds() const { return bounds_; }
  size_t voxelCount() const { return dims_.count(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  std::span<double> voxel(size_t v)
  {
    return {values_.data() + v * size_t(channels_), size_t(channels_)};
  }
  std::span<const double> voxel(size_t v) const
  {
    return {values_.data() + v * size_t(channels_), size_t(channels_)};
  }
  double& at(size_t v, int c) { return values_[v * size_t(channels_) + c]; }
  double at(size_t v, int c) const { return values_[v * size_t(channels_) + c]; }

  // World position of a voxel centre. Centres span the bounds inclusively.
  Vec3 center(int i, int j, int k) const;

  // Throws when p lies outside the world bounds.
  TrilinearCorners corners(Vec3 p) const;
  void sample(Vec3 p, std::span<double> out) const;
  std::vector<double> sample(Vec3 p) const;

private:
  Dims dims_;
  int channels_ = 0;
  Bounds bounds_;
  std::vector<double> values_;
};

//============================================================================
// Raw payload import/export (little-endian IEEE-754 binary32).

struct GridHeader {
  Dims dims;
  int channels = 1;
  Bounds bounds;
};

VoxelGrid importGrid(const GridHeader& header, std::span<const uint8_t> payload);
std::vector<uint8_t> exportGrid(const VoxelGrid& grid);

// JSON sidecar: {"dims":[x,y,z],"channels":C,"world_bounds":[[..],[..]],
// "dtype":"f32le","payload":"file.f32"}.  The payload path is relative to
// the sidecar.
VoxelGrid loadGridFile(const std::string& jsonPath);
void saveGridFile(
  const VoxelGrid& grid, const std::string& jsonPath,
  const std::string& payloadName);

//============================================================================
// Importance-driven masks.

struct VoxelMask {
  Dims dims;
  std::vector<uint8_t> bits;

  VoxelMask() = default;
  explicit VoxelMask(Dims d) : dims(d), bits(d.count(), 0) {}

  bool operator[](size_t v) const { return bits[v] != 0; }
  void set(size_t v, bool on) { bits[v] = on ? 1 : 0; }
  size_t popcount() const;

  friend bool operator==(const VoxelMask&, const VoxelMask&) = default;
};

struct ImportanceField {
  Dims dims;
  std::vector<double> score;
};

// Prunes the longest ascending-score prefix whose cumulative score stays
// within pruneQuantile of the total. Zero-score voxels are always pruned.
VoxelMask prune(const ImportanceField& imp, double pruneQuantile);

// Marks the shortest descending-score prefix of unpruned voxels whose
// cumulative score reaches keepQuantile of the unpruned total.
VoxelMask markCritical(
  const ImportanceField& imp, const VoxelMask& pruned, double keepQuantile);

}  // namespace spc
