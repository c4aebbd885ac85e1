#include "spc/grid.h"

#include "spc/error.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>

namespace spc {

Vec3
Bounds::clamp(Vec3 p) const
{
  for (int a = 0; a < 3; a++)
    p[a] = std::min(std::max(p[a], lo[a]), hi[a]);
  return p;
}

//============================================================================

VoxelGrid::VoxelGrid(Dims dims, int channels, Bounds bounds)
  : VoxelGrid(dims, channels, bounds,
              std::vector<double>(dims.count() * size_t(std::max(channels, 0))))
{}

VoxelGrid::VoxelGrid(
  Dims dims, int channels, Bounds bounds, std::vector<double> values)
  : dims_(dims), channels_(channels), bounds_(bounds), values_(std::move(values))
{
  if (dims.x < 1 || dims.y < 1 || dims.z < 1)
    throwData("grid dims must be positive");
  if (channels < 1)
    throwData("grid needs at least one channel");
  for (int a = 0; a < 3; a++)
    if (!(bounds.lo[a] < bounds.hi[a]))
      throwData("world bounds must satisfy min < max on every axis");
  if (values_.size() != dims.count() * size_t(channels))
    throwData(
      "grid holds " + std::to_string(values_.size()) + " values, expected "
      + std::to_string(dims.count() * size_t(channels)));
}

Vec3
VoxelGrid::center(int i, int j, int k) const
{
  int n[3] = {dims_.x, dims_.y, dims_.z};
  int c[3] = {i, j, k};
  Vec3 p;
  for (int a = 0; a < 3; a++) {
    double t = n[a] > 1 ? double(c[a]) / double(n[a] - 1) : 0.0;
    p[a] = bounds_.lo[a] + t * (bounds_.hi[a] - bounds_.lo[a]);
  }
  return p;
}

//----------------------------------------------------------------------------

TrilinearCorners
VoxelGrid::corners(Vec3 p) const
{
  if (!bounds_.contains(p))
    throwData("trilinear sample outside world bounds");

  int n[3] = {dims_.x, dims_.y, dims_.z};
  int base[3];
  double frac[3];
  for (int a = 0; a < 3; a++) {
    if (n[a] == 1) {
      base[a] = 0;
      frac[a] = 0;
      continue;
    }
    double g = (p[a] - bounds_.lo[a]) / (bounds_.hi[a] - bounds_.lo[a])
      * double(n[a] - 1);
    int i0 = std::min(int(std::floor(g)), n[a] - 2);
    i0 = std::max(i0, 0);
    base[a] = i0;
    frac[a] = g - double(i0);
  }

  TrilinearCorners out;
  for (int corner = 0; corner < 8; corner++) {
    int d[3] = {corner & 1, (corner >> 1) & 1, (corner >> 2) & 1};
    double w = 1.0;
    int c[3];
    for (int a = 0; a < 3; a++) {
      w *= d[a] ? frac[a] : 1.0 - frac[a];
      c[a] = n[a] == 1 ? 0 : base[a] + d[a];
    }
    out.voxel[corner] = dims_.index(c[0], c[1], c[2]);
    out.weight[corner] = w;
  }
  return out;
}

void
VoxelGrid::sample(Vec3 p, std::span<double> out) const
{
  auto tc = corners(p);
  std::fill(out.begin(), out.end(), 0.0);
  for (int corner = 0; corner < 8; corner++) {
    double w = tc.weight[corner];
    if (w == 0.0)
      continue;
    const double* src = values_.data() + tc.voxel[corner] * size_t(channels_);
    for (int c = 0; c < channels_; c++)
      out[c] += w * src[c];
  }
}

std::vector<double>
VoxelGrid::sample(Vec3 p) const
{
  std::vector<double> out(static_cast<size_t>(channels_));
  sample(p, out);
  return out;
}

//============================================================================

VoxelGrid
importGrid(const GridHeader& header, std::span<const uint8_t> payload)
{
  size_t count = header.dims.count() * size_t(std::max(header.channels, 0));
  size_t expected = count * 4;
  if (payload.size() != expected)
    throwData(
      "grid payload length mismatch: expected " + std::to_string(expected)
      + " bytes, got " + std::to_string(payload.size()));

  std::vector<double> values(count);
  for (size_t i = 0; i < count; i++) {
    const uint8_t* b = payload.data() + 4 * i;
    uint32_t bits = uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16
      | uint32_t(b[3]) << 24;
    float f = std::bit_cast<float>(bits);
    if (!std::isfinite(f))
      throwData("non-finite grid value at index " + std::to_string(i));
    values[i] = f;
  }
  return VoxelGrid(header.dims, header.channels, header.bounds, std::move(values));
}

std::vector<uint8_t>
exportGrid(const VoxelGrid& grid)
{
  auto values = grid.values();
  std::vector<uint8_t> out(values.size() * 4);
  for (size_t i = 0; i < values.size(); i++) {
    uint32_t bits = std::bit_cast<uint32_t>(float(values[i]));
    for (int k = 0; k < 4; k++)
      out[4 * i + k] = uint8_t(bits >> (8 * k));
  }
  return out;
}

//----------------------------------------------------------------------------

namespace {

  std::vector<uint8_t> readFile(const std::filesystem::path& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throwData("cannot open " + path.string());
    return std::vector<uint8_t>(
      std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

}  // namespace

VoxelGrid
loadGridFile(const std::string& jsonPath)
{
  std::ifstream in(jsonPath);
  if (!in)
    throwData("cannot open " + jsonPath);

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    GridHeader header;
    auto d = j.at("dims");
    header.dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
    header.channels = j.at("channels").get<int>();
    auto wb = j.at("world_bounds");
    for (int a = 0; a < 3; a++) {
      header.bounds.lo[a] = wb.at(0).at(a).get<double>();
      header.bounds.hi[a] = wb.at(1).at(a).get<double>();
    }
    if (j.value("dtype", std::string("f32le")) != "f32le")
      throwData(jsonPath + ": only dtype f32le is supported");

    auto payloadPath = std::filesystem::path(jsonPath).parent_path()
      / j.at("payload").get<std::string>();
    auto payload = readFile(payloadPath);
    return importGrid(header, payload);
  }
  catch (const nlohmann::json::exception& e) {
    throwData(jsonPath + ": " + e.what());
  }
}

void
saveGridFile(
  const VoxelGrid& grid, const std::string& jsonPath,
  const std::string& payloadName)
{
  const auto& b = grid.bounds();
  nlohmann::json j;
  j["dims"] = {grid.dims().x, grid.dims().y, grid.dims().z};
  j["channels"] = grid.channels();
  j["world_bounds"] = {{b.lo.x, b.lo.y, b.lo.z}, {b.hi.x, b.hi.y, b.hi.z}};
  j["dtype"] = "f32le";
  j["payload"] = payloadName;

  std::ofstream(jsonPath) << j.dump(2) << "\n";
  auto bytes = exportGrid(grid);
  auto payloadPath = std::filesystem::path(jsonPath).parent_path() / payloadName;
  std::ofstream out(payloadPath, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out)
    throwData("cannot write " + payloadPath.string());
}

//============================================================================

size_t
VoxelMask::popcount() const
{
  return size_t(std::count(bits.begin(), bits.end(), uint8_t(1)));
}

namespace {

  // Voxel ids ordered by score; ties are kept in id order but always
  // consumed as a group so the resulting masks do not depend on voxel order.
  std::vector<size_t> sortedIds(
    const std::vector<double>& score, bool descending,
    const std::vector<size_t>& ids)
  {
    std::vector<size_t> order = ids;
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return descending ? score[a] > score[b] : score[a] < score[b];
    });
    return order;
  }

}  // namespace

VoxelMask
prune(const ImportanceField& imp, double pruneQuantile)
{
  if (!(pruneQuantile >= 0.0 && pruneQuantile < 1.0))
    throwUsage("prune quantile must lie in [0, 1)");

  std::vector<size_t> all(imp.score.size());
  std::iota(all.begin(), all.end(), size_t(0));
  auto order = sortedIds(imp.score, false, all);

  long double total = 0;
  for (size_t v : order)
    total += imp.score[v];
  if (!(total > 0))
    throwData("scene renders to nothing: total importance is zero");

  const long double budget = (long double)pruneQuantile * total;
  VoxelMask mask(imp.dims);
  long double cum = 0;
  size_t i = 0;
  while (i < order.size()) {
    size_t j = i;
    long double group = 0;
    double s = imp.score[order[i]];
    while (j < order.size() && imp.score[order[j]] == s)
      group += imp.score[order[j++]];
    if (s > 0 && cum + group > budget)
      break;
    cum += group;
    for (; i < j; i++)
      mask.set(order[i], true);
  }
  return mask;
}

VoxelMask
markCritical(
  const ImportanceField& imp, const VoxelMask& pruned, double keepQuantile)
{
  if (!(keepQuantile > 0.0 && keepQuantile <= 1.0))
    throwUsage("keep quantile must lie in (0, 1]");

  std::vector<size_t> kept;
  for (size_t v = 0; v < imp.score.size(); v++)
    if (!pruned[v])
      kept.push_back(v);
  auto order = sortedIds(imp.score, true, kept);

  long double total = 0;
  for (size_t v : order)
    total += imp.score[v];
  const long double target = (long double)keepQuantile * total;

  VoxelMask mask(imp.dims);
  long double cum = 0;
  size_t i = 0;
  while (i < order.size() && !(cum >= target && i > 0)) {
    double s = imp.score[order[i]];
    while (i < order.size() && imp.score[order[i]] == s) {
      cum += imp.score[order[i]];
      mask.set(order[i++], true);
    }
  }
  return mask;
}

}  // namespace spc
