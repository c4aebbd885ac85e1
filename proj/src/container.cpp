#include "spc/container.h"

#include "spc/entropy.h"
#include "spc/error.h"
#include "spc/half.h"
#include "spc/importance.h"
#include "spc/lz77.h"
#include "spc/refgraph.h"

#include <nlohmann/json.hpp>
#include <zlib.h>

#include <algorithm>
#include <cmath>

namespace spc {

const char*
sectionName(SectionId id)
{
  switch (id) {
  case SectionId::kMetadata: return "metadata";
  case SectionId::kPruneMask: return "prune_mask";
  case SectionId::kCriticalMask: return "critical_mask";
  case SectionId::kReferenceIndexes: return "reference_indexes";
  case SectionId::kCoarseResiduals: return "coarse_residuals";
  case SectionId::kFineResiduals: return "fine_residuals";
  case SectionId::kDensity: return "density";
  case SectionId::kNetWeights: return "net_weights";
  }
  return "unknown";
}

namespace {

  uint32_t crc32Of(std::span<const uint8_t> bytes)
  {
    uLong crc = crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths
    size_t pos = 0;
    while (pos < bytes.size()) {
      uInt chunk = uInt(std::min<size_t>(bytes.size() - pos, 1u << 30));
      crc = crc32(crc, bytes.data() + pos, chunk);
      pos += chunk;
    }
    return uint32_t(crc);
  }

  template<typename T>
  void putLE(std::vector<uint8_t>& out, T v)
  {
    for (size_t k = 0; k < sizeof(T); k++)
      out.push_back(uint8_t(uint64_t(v) >> (8 * k)));
  }

  template<typename T>
  T getLE(std::span<const uint8_t> in, size_t pos)
  {
    uint64_t v = 0;
    for (size_t k = 0; k < sizeof(T); k++)
      v |= uint64_t(in[pos + k]) << (8 * k);
    return T(v);
  }

}  // namespace

std::vector<uint8_t>
frameContainer(const SectionPayloads& sections)
{
  std::vector<uint8_t> out{'S', 'P', 'C', 'V'};
  putLE<uint16_t>(out, kContainerVersion);
  uint64_t offset = kContainerHeaderBytes;
  for (int id = 0; id < kSectionCount; id++) {
    const auto& s = sections[size_t(id)];
    putLE<uint8_t>(out, uint8_t(id));
    putLE<uint64_t>(out, offset);
    putLE<uint64_t>(out, s.size());
    putLE<uint32_t>(out, crc32Of(s));
    offset += s.size();
  }
  for (const auto& s : sections)
    out.insert(out.end(), s.begin(), s.end());
  return out;
}

SectionPayloads
parseContainer(std::span<const uint8_t> bytes)
{
  if (bytes.size() < 6)
    throwData("container truncated: " + std::to_string(bytes.size()) + " bytes");
  if (!std::equal(bytes.begin(), bytes.begin() + 4, "SPCV"))
    throwData("bad magic: not an .spcv container");
  uint16_t version = getLE<uint16_t>(bytes, 4);
  if (version != kContainerVersion)
    throwData("unsupported container version " + std::to_string(version));
  if (bytes.size() < kContainerHeaderBytes)
    throwData("container truncated inside the section table");

  SectionPayloads out;
  uint64_t expectedOffset = kContainerHeaderBytes;
  for (int i = 0; i < kSectionCount; i++) {
    size_t pos = 6 + size_t(i) * kSectionEntryBytes;
    uint8_t id = bytes[pos];
    uint64_t offset = getLE<uint64_t>(bytes, pos + 1);
    uint64_t length = getLE<uint64_t>(bytes, pos + 9);
    uint32_t crc = getLE<uint32_t>(bytes, pos + 17);
    if (id >= kSectionCount)
      throwData("unknown section id " + std::to_string(id));
    if (id != i)
      throwData("section table not sorted by id at entry " + std::to_string(i));
    if (offset != expectedOffset)
      throwData(
        std::string("section ") + sectionName(SectionId(id))
        + " offset does not follow the previous section");
    if (length > bytes.size() || offset > bytes.size() - length)
      throwData(
        std::string("section ") + sectionName(SectionId(id))
        + " extends past the end of the container");
    auto payload = bytes.subspan(size_t(offset), size_t(length));
    if (crc32Of(payload) != crc)
      throwData(std::string("crc mismatch in section ") + sectionName(SectionId(id)));
    out[id].assign(payload.begin(), payload.end());
    expectedOffset = offset + length;
  }
  if (expectedOffset != bytes.size())
    throwData("trailing bytes after the last section");
  return out;
}

//============================================================================

std::vector<uint8_t>
packMask(const VoxelMask& mask)
{
  std::vector<uint8_t> out((mask.bits.size() + 7) / 8, 0);
  for (size_t v = 0; v < mask.bits.size(); v++)
    if (mask.bits[v])
      out[v >> 3] |= uint8_t(0x80u >> (v & 7));
  return out;
}

VoxelMask
unpackMask(std::span<const uint8_t> bytes, const Dims& dims)
{
  VoxelMask mask(dims);
  if (bytes.size() != (dims.count() + 7) / 8)
    throwData("mask length does not match the grid dims");
  for (size_t v = 0; v < dims.count(); v++)
    mask.set(v, bytes[v >> 3] & (0x80u >> (v & 7)));
  for (size_t v = dims.count(); v < bytes.size() * 8; v++)
    if (bytes[v >> 3] & (0x80u >> (v & 7)))
      throwData("mask padding bits are not zero");
  return mask;
}

size_t
rawModelBytes(const VoxelModel& model)
{
  return 4 * (model.density.values().size() + model.features.values().size()
              + model.net.paramCount());
}

//============================================================================

namespace {

  constexpr const char* kCandidateSetName = "causal7-v1";

  std::vector<uint8_t> packHalves(std::span<const double> values)
  {
    std::vector<uint8_t> out;
    out.reserve(values.size() * 2);
    for (double v : values)
      putLE<uint16_t>(out, floatToHalf(float(v)));
    return out;
  }

  std::vector<double> unpackHalves(std::span<const uint8_t> bytes, size_t count, const char* what)
  {
    if (bytes.size() != count * 2)
      throwData(std::string(what) + ": expected " + std::to_string(count * 2)
                + " bytes, got " + std::to_string(bytes.size()));
    std::vector<double> out(count);
    for (size_t i = 0; i < count; i++) {
      float f = halfToFloat(getLE<uint16_t>(bytes, 2 * i));
      if (!std::isfinite(f))
        throwData(std::string(what) + ": non-finite value at index " + std::to_string(i));
      out[i] = f;
    }
    return out;
  }

  std::vector<double> unprunedDensity(const VoxelGrid& density, const VoxelMask& pruned)
  {
    std::vector<double> out;
    for (size_t v = 0; v < density.voxelCount(); v++)
      if (!pruned[v])
        out.push_back(density.at(v, 0));
    return out;
  }

  // Decoder-side density: unpruned voxels from the coded list, pruned ones
  // take the fill value.
  VoxelGrid assembleDensity(
    std::span<const double> unpruned, const VoxelMask& pruned, double fill,
    const Bounds& bounds)
  {
    VoxelGrid g(pruned.dims, 1, bounds);
    size_t next = 0;
    for (size_t v = 0; v < g.voxelCount(); v++)
      g.at(v, 0) = pruned[v] ? fill : unpruned[next++];
    return g;
  }

  struct Metadata {
    GridHeader header;
    QuantParams quant;
    double densityShift = 0.0;
    double prunedDensity = 0.0;
    ColorNetShape net;
    double lambda = 0.0;
    bool prediction = true;
    bool postFinetune = true;
  };

  std::vector<uint8_t> writeMetadata(const Metadata& m)
  {
    nlohmann::json j;
    const auto& b = m.header.bounds;
    j["format"] = "spcv";
    j["dims"] = {m.header.dims.x, m.header.dims.y, m.header.dims.z};
    j["channels"] = m.header.channels;
    j["world_bounds"] = {{b.lo.x, b.lo.y, b.lo.z}, {b.hi.x, b.hi.y, b.hi.z}};
    j["q_step"] = m.quant.qStep;
    j["q_fine"] = m.quant.qFine;
    j["clamp_mag"] = m.quant.clampMag;
    j["density_shift"] = m.densityShift;
    j["pruned_density"] = m.prunedDensity;
    j["precision"] = "f16";
    j["net"] = {
      {"feature_channels", m.net.featureChannels},
      {"view_bands", m.net.viewBands},
      {"hidden", m.net.hidden},
      {"hidden_layers", m.net.hiddenLayers}};
    j["lambda"] = m.lambda;
    j["candidate_set"] = kCandidateSetName;
    j["prediction"] = m.prediction;
    j["post_finetune"] = m.postFinetune;
    auto text = j.dump();
    return {text.begin(), text.end()};
  }

  Metadata readMetadata(std::span<const uint8_t> bytes)
  {
    Metadata m;
    try {
      auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
      if (j.at("format").get<std::string>() != "spcv")
        throwData("metadata: unexpected format tag");
      if (j.at("candidate_set").get<std::string>() != kCandidateSetName)
        throwData("metadata: unsupported candidate set");
      if (j.at("precision").get<std::string>() != "f16")
        throwData("metadata: unsupported precision");
      auto d = j.at("dims");
      m.header.dims = {d.at(0).get<int>(), d.at(1).get<int>(), d.at(2).get<int>()};
      m.header.channels = j.at("channels").get<int>();
      auto wb = j.at("world_bounds");
      for (int a = 0; a < 3; a++) {
        m.header.bounds.lo[a] = wb.at(0).at(a).get<double>();
        m.header.bounds.hi[a] = wb.at(1).at(a).get<double>();
      }
      m.quant.qStep = j.at("q_step").get<double>();
      m.quant.qFine = j.at("q_fine").get<double>();
      m.quant.clampMag = j.at("clamp_mag").get<int>();
      m.densityShift = j.at("density_shift").get<double>();
      m.prunedDensity = j.at("pruned_density").get<double>();
      const auto& n = j.at("net");
      m.net = {
        n.at("feature_channels").get<int>(), n.at("view_bands").get<int>(),
        n.at("hidden").get<int>(), n.at("hidden_layers").get<int>()};
      m.lambda = j.at("lambda").get<double>();
      m.prediction = j.at("prediction").get<bool>();
      m.postFinetune = j.at("post_finetune").get<bool>();
    }
    catch (const nlohmann::json::exception& e) {
      throwData(std::string("metadata: ") + e.what());
    }

    const auto& d = m.header.dims;
    if (d.x < 1 || d.y < 1 || d.z < 1 || d.x > 1024 || d.y > 1024 || d.z > 1024
        || d.count() > (size_t(1) << 27))
      throwData("metadata: grid dims out of range");
    if (m.header.channels < 1 || m.header.channels > 256)
      throwData("metadata: channel count out of range");
    if (m.net.featureChannels != m.header.channels || m.net.viewBands < 0
        || m.net.viewBands > 16 || m.net.hidden < 1 || m.net.hidden > 4096
        || m.net.hiddenLayers < 1 || m.net.hiddenLayers > 64)
      throwData("metadata: colour net shape out of range");
    for (int a = 0; a < 3; a++)
      if (!(m.header.bounds.lo[a] < m.header.bounds.hi[a]))
        throwData("metadata: world bounds are empty");
    if (!(m.quant.qStep > 0) || !(m.quant.qFine > 0) || m.quant.qFine > m.quant.qStep
        || m.quant.clampMag < 1)
      throwData("metadata: invalid quantization parameters");
    if (!std::isfinite(m.densityShift) || !std::isfinite(m.prunedDensity))
      throwData("metadata: non-finite density parameters");
    return m;
  }

  template <class F>
  auto inStage(const char* name, F&& f)
  {
    try {
      return f();
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
  }

  ColorNet roundedNet(const ColorNet& net)
  {
    ColorNet out = net;
    for (auto& p : out.params())
      p = roundToHalf(p);
    return out;
  }

}  // namespace

CompressResult
compress(const VoxelModel& input, const Scene& scene, const CompressConfig& cfg)
{
  input.validate();
  scene.validate();
  cfg.quant.validate();
  cfg.tune.validate();

  CompressResult result;
  auto& stats = result.stats;
  const Dims dims = input.dims();
  const int channels = input.features.channels();
  const Bounds bounds = input.features.bounds();
  stats.voxels = dims.count();

  // importance -> masks
  auto importance = inStage(
    "importance", [&] { return computeImportance(input, scene.allRays(), scene.render); });
  VoxelMask pruned = prune(importance, cfg.pruneQuantile);
  VoxelMask critical = markCritical(importance, pruned, cfg.keepQuantile);
  stats.pruned = pruned.popcount();
  stats.critical = critical.popcount();

  double fill = *std::min_element(
    input.density.values().begin(), input.density.values().end());
  fill = roundToHalf(fill);

  VoxelModel model = input;
  for (size_t v = 0; v < dims.count(); v++) {
    if (!pruned[v])
      continue;
    model.density.at(v, 0) = fill;
    for (auto& x : model.features.voxel(v))
      x = 0.0;
  }

  // reference graph over the initial quantized features, fixed from here on
  auto q0 = quantizeGrid(model.features, cfg.quant.qStep, cfg.quant.clampMag, pruned);
  ReferenceGraph graph = buildReferenceGraph(q0, pruned);
  stats.edges = graph.edgeCount();

  MainStageInputs mainIn{&scene, &graph, &pruned, cfg.quant};
  result.trace = inStage("stage-1 finetune", [&] { return finetuneMain(model, mainIn, cfg.tune); });
  if (graph.edgeCount() > 0)
    stats.rateEstimate = rateMain(model.features, graph).value / cfg.quant.qStep;

  // coarse layer
  auto qgrid = quantizeGrid(
    model.features, cfg.quant.qStep, cfg.quant.clampMag, pruned, &stats.clampEvents);
  const ReferenceGraph codingGraph = cfg.prediction ? graph : emptyReferenceGraph(dims);
  ResidualPlanes planes;
  planes.channels = channels;
  planes.coarse = inStage("prediction", [&] { return computeResiduals(qgrid, codingGraph, pruned); });
  VoxelGrid coarseRecon = dequantizeGrid(qgrid, {}, critical, cfg.quant, bounds);

  // fine layer
  model.features = coarseRecon;
  if (cfg.postFinetune) {
    PostStageInputs postIn{&scene, &coarseRecon, &pruned, &critical, cfg.quant};
    auto trace = inStage("stage-2 finetune", [&] { return finetunePost(model, postIn, cfg.tune); });
    result.trace.insert(result.trace.end(), trace.begin(), trace.end());
    planes.fine = computeFineResiduals(model.features, coarseRecon, critical, cfg.quant);
  }

  // sections
  Metadata meta;
  meta.header = {dims, channels, bounds};
  meta.quant = cfg.quant;
  meta.densityShift = input.densityShift;
  meta.prunedDensity = fill;
  meta.net = input.net.shape();
  meta.lambda = cfg.tune.lambda;
  meta.prediction = cfg.prediction;
  meta.postFinetune = cfg.postFinetune;

  auto densityValues = unprunedDensity(model.density, pruned);
  SectionPayloads sections;
  sections[0] = lz77Encode(writeMetadata(meta));
  sections[1] = lz77Encode(packMask(pruned));
  sections[2] = lz77Encode(packMask(critical));
  if (cfg.prediction)
    sections[3] = encodeIndexes(graph, pruned);
  sections[4] = encodeResiduals(planes.coarse, channels);
  if (cfg.postFinetune)
    sections[5] = encodeResiduals(planes.fine, channels);
  sections[6] = lz77Encode(packHalves(densityValues));
  sections[7] = lz77Encode(packHalves(model.net.params()));
  for (int i = 0; i < kSectionCount; i++)
    stats.sectionBytes[size_t(i)] = sections[size_t(i)].size();
  result.bytes = frameContainer(sections);

  // encoder-side reconstruction from the in-memory layers
  VoxelModel& rec = result.reconstruction;
  rec.features = reconstruct(planes, codingGraph, pruned, critical, cfg.quant, bounds);
  for (auto& x : densityValues)
    x = roundToHalf(x);
  rec.density = assembleDensity(densityValues, pruned, fill, bounds);
  rec.net = roundedNet(model.net);
  rec.densityShift = input.densityShift;
  return result;
}

VoxelModel
decompress(std::span<const uint8_t> bytes)
{
  auto sections = parseContainer(bytes);
  Metadata meta = readMetadata(lz77Decode(sections[0]));
  const Dims& dims = meta.header.dims;
  const int channels = meta.header.channels;

  VoxelMask pruned = unpackMask(lz77Decode(sections[1]), dims);
  VoxelMask critical = unpackMask(lz77Decode(sections[2]), dims);
  for (size_t v = 0; v < dims.count(); v++)
    if (critical[v] && pruned[v])
      throwData("critical mask marks a pruned voxel");
  const size_t unprunedCount = dims.count() - pruned.popcount();

  ReferenceGraph graph = emptyReferenceGraph(dims);
  if (meta.prediction)
    graph = decodeIndexes(sections[3], pruned);
  else if (!sections[3].empty())
    throwData("reference index section present with prediction disabled");

  ResidualPlanes planes;
  planes.channels = channels;
  planes.coarse = decodeResiduals(sections[4], unprunedCount * size_t(channels), channels);
  if (meta.postFinetune)
    planes.fine = decodeResiduals(sections[5], critical.popcount() * size_t(channels), channels);
  else if (!sections[5].empty())
    throwData("fine residual section present with post finetuning disabled");
  for (int32_t y : planes.coarse)
    if (std::abs(int64_t(y)) > 2 * int64_t(meta.quant.clampMag))
      throwData("coarse residual outside the clamp range");
  for (int32_t f : planes.fine)
    if (std::abs(int64_t(f)) > int64_t(meta.quant.clampMag))
      throwData("fine residual outside the clamp range");

  VoxelModel m;
  m.features = reconstruct(planes, graph, pruned, critical, meta.quant, meta.header.bounds);
  auto density = unpackHalves(lz77Decode(sections[6]), unprunedCount, "density section");
  m.density = assembleDensity(density, pruned, meta.prunedDensity, meta.header.bounds);
  m.densityShift = meta.densityShift;
  m.net = ColorNet(meta.net);
  auto params = unpackHalves(lz77Decode(sections[7]), m.net.paramCount(), "net section");
  std::copy(params.begin(), params.end(), m.net.params().begin());
  m.validate();
  return m;
}

}  // namespace spc
