#pragma once

#include "spc/model.h"
#include "spc/predict.h"
#include "spc/quant.h"
#include "spc/scene.h"
#include "spc/tune.h"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace spc {

//============================================================================
// .spcv layout (all integers little-endian):
//   "SPCV" | u16 version | 8 x {u8 id, u64 offset, u64 length, u32 crc32}
//   | section payloads in id order
// Offsets are absolute. Sections are contiguous, non-overlapping and sorted
// by id; every id appears exactly once.

constexpr uint16_t kContainerVersion = 1;
constexpr int kSectionCount = 8;
constexpr size_t kSectionEntryBytes = 1 + 8 + 8 + 4;
constexpr size_t kContainerHeaderBytes = 4 + 2 + kSectionCount * kSectionEntryBytes;

enum class SectionId : uint8_t
{
  kMetadata = 0,
  kPruneMask = 1,
  kCriticalMask = 2,
  kReferenceIndexes = 3,
  kCoarseResiduals = 4,
  kFineResiduals = 5,
  kDensity = 6,
  kNetWeights = 7,
};

const char* sectionName(SectionId id);

using SectionPayloads = std::array<std::vector<uint8_t>, kSectionCount>;

std::vector<uint8_t> frameContainer(const SectionPayloads& sections);
// Validates magic, version, table layout and every CRC before returning.
SectionPayloads parseContainer(std::span<const uint8_t> bytes);

//============================================================================

struct CompressConfig {
  TuneConfig tune = TuneConfig::desk();
  QuantParams quant;
  double pruneQuantile = 0.001;
  double keepQuantile = 0.6;
  bool prediction = true;    // false: code quantized values directly
  bool postFinetune = true;  // false: no fine layer, no stage 2
};

struct CompressStats {
  size_t voxels = 0;
  size_t pruned = 0;
  size_t critical = 0;
  size_t edges = 0;
  size_t clampEvents = 0;
  // Mean L1 edge difference of the stage-1 features divided by qStep.
  double rateEstimate = 0.0;
  std::array<size_t, kSectionCount> sectionBytes{};
};

struct CompressResult {
  std::vector<uint8_t> bytes;
  VoxelModel reconstruction;  // exactly what decompress(bytes) yields
  CompressStats stats;
  std::vector<TraceRow> trace;
};

CompressResult
compress(const VoxelModel& model, const Scene& scene, const CompressConfig& cfg);

VoxelModel decompress(std::span<const uint8_t> bytes);

// Raw size of the uncompressed model with 32-bit grids and net weights.
size_t rawModelBytes(const VoxelModel& model);

// Mask bit-packing, MSB first, zero padded.
std::vector<uint8_t> packMask(const VoxelMask& mask);
VoxelMask unpackMask(std::span<const uint8_t> bytes, const Dims& dims);

}  // namespace spc
