#include "spc/scene.h"

#include "spc/error.h"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

namespace spc {

void
Scene::validate() const
{
  if (cameras.empty())
    throwData("scene has no cameras");
  if (images.size() != cameras.size())
    throwData("scene image count does not match its camera count");
  for (size_t i = 0; i < cameras.size(); i++) {
    const auto& img = images[i];
    if (img.width != cameras[i].width || img.height != cameras[i].height)
      throwData("scene image " + std::to_string(i) + " does not match its camera");
    for (double v : img.rgb)
      if (!(v >= 0.0 && v <= 1.0))
        throwData("scene image " + std::to_string(i) + " has values outside [0, 1]");
  }
}

size_t
Scene::pixelCount() const
{
  size_t n = 0;
  for (const auto& c : cameras)
    n += size_t(c.width) * size_t(c.height);
  return n;
}

RaySet
Scene::allRays() const
{
  RaySet rays;
  rays.reserve(pixelCount());
  for (const auto& c : cameras) {
    auto r = cameraRays(c);
    rays.insert(rays.end(), r.begin(), r.end());
  }
  return rays;
}

//============================================================================

std::vector<CameraPose>
orbitCameras(int count, int imageSize, double radius)
{
  std::vector<CameraPose> cams;
  const double fov = 40.0 * std::numbers::pi / 180.0;
  const double focal = 0.5 * imageSize / std::tan(0.5 * fov);
  const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
  for (int i = 0; i < count; i++) {
    // elevations spread between -25 and +55 degrees
    double t = count > 1 ? double(i) / double(count - 1) : 0.5;
    double elev = (-25.0 + 80.0 * t) * std::numbers::pi / 180.0;
    double azim = golden * i;
    Vec3 eye{
      radius * std::cos(elev) * std::cos(azim),
      radius * std::sin(elev),
      radius * std::cos(elev) * std::sin(azim)};
    cams.push_back(lookAt(eye, {0, 0, 0}, {0, 1, 0}, focal, imageSize, imageSize));
  }
  return cams;
}

namespace {

  // Separable Gaussian blur of a single-channel volume, clamped borders.
  void blur(std::vector<double>& vol, const Dims& d, double sigma)
  {
    int radius = int(std::ceil(3 * sigma));
    std::vector<double> k(size_t(2 * radius + 1));
    double sum = 0;
    for (int i = -radius; i <= radius; i++)
      sum += k[size_t(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma));
    for (auto& w : k)
      w /= sum;

    int n[3] = {d.x, d.y, d.z};
    std::vector<double> tmp(vol.size());
    for (int axis = 0; axis < 3; axis++) {
      for (int z = 0; z < d.z; z++)
        for (int y = 0; y < d.y; y++)
          for (int x = 0; x < d.x; x++) {
            int c[3] = {x, y, z};
            double acc = 0;
            for (int i = -radius; i <= radius; i++) {
              int cc[3] = {c[0], c[1], c[2]};
              cc[axis] = std::clamp(c[axis] + i, 0, n[axis] - 1);
              acc += k[size_t(i + radius)] * vol[d.index(cc[0], cc[1], cc[2])];
            }
            tmp[d.index(x, y, z)] = acc;
          }
      vol.swap(tmp);
    }
  }

}  // namespace

SyntheticScene
makeSyntheticScene(const SyntheticConfig& cfg)
{
  if (cfg.dims < 2 || cfg.channels < 1 || cfg.cameras < 1 || cfg.imageSize < 1)
    throwUsage("invalid synthetic scene configuration");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const Dims dims{cfg.dims, cfg.dims, cfg.dims};
  const Bounds bounds;

  struct Blob {
    Vec3 c;
    double r;
  };
  std::vector<Blob> blobs;
  for (int b = 0; b < cfg.blobs; b++) {
    Vec3 c{uni(rng) - 0.5, uni(rng) - 0.5, uni(rng) - 0.5};
    blobs.push_back({c * 0.9, 0.25 + 0.2 * uni(rng)});
  }

  VoxelModel m;
  m.density = VoxelGrid(dims, 1, bounds);
  for (int z = 0; z < dims.z; z++)
    for (int y = 0; y < dims.y; y++)
      for (int x = 0; x < dims.x; x++) {
        Vec3 p = m.density.center(x, y, z);
        double occ = 0;
        for (const auto& b : blobs) {
          double q = norm(p - b.c) / b.r;
          occ = std::max(occ, std::exp(-std::numbers::ln2 * q * q * q * q));
        }
        m.density.at(dims.index(x, y, z), 0) = -14.0 + 28.0 * occ;
      }

  m.features = VoxelGrid(dims, cfg.channels, bounds);
  std::vector<double> plane(dims.count());
  for (int c = 0; c < cfg.channels; c++) {
    for (auto& v : plane)
      v = gauss(rng);
    blur(plane, dims, cfg.featureBlur);
    double mean = 0, var = 0;
    for (double v : plane)
      mean += v;
    mean /= double(plane.size());
    for (double v : plane)
      var += (v - mean) * (v - mean);
    double scale = cfg.featureStd / std::sqrt(var / double(plane.size()));
    for (size_t v = 0; v < plane.size(); v++)
      m.features.at(v, c) = (plane[v] - mean) * scale;
  }

  ColorNetShape shape = cfg.net;
  shape.featureChannels = cfg.channels;
  m.net = ColorNet(shape);
  m.net.initRandom(rng, 1.0 / cfg.featureStd);

  SyntheticScene out;
  out.scene.cameras = orbitCameras(cfg.cameras, cfg.imageSize, 3.2);
  for (const auto& cam : out.scene.cameras)
    out.scene.images.push_back(renderImage(m, cam, out.scene.render));
  out.groundTruth = std::move(m);
  return out;
}

VoxelModel
perturbModel(const VoxelModel& gt, uint64_t seed, double featureNoise)
{
  VoxelModel m = gt;
  std::mt19937_64 rng(seed ^ 0x5eed5eed5eedull);
  std::normal_distribution<double> gauss(0.0, featureNoise);
  for (auto& v : m.features.values())
    v += gauss(rng);
  return m;
}

double
meanPsnr(const VoxelModel& model, const Scene& scene)
{
  double sum = 0;
  for (size_t i = 0; i < scene.cameras.size(); i++)
    sum += psnr(renderImage(model, scene.cameras[i], scene.render), scene.images[i]);
  return sum / double(scene.cameras.size());
}

double
meanSsim(const VoxelModel& model, const Scene& scene)
{
  double sum = 0;
  for (size_t i = 0; i < scene.cameras.size(); i++)
    sum += ssim(renderImage(model, scene.cameras[i], scene.render), scene.images[i]);
  return sum / double(scene.cameras.size());
}

//============================================================================

namespace {

  namespace fs = std::filesystem;
  using nlohmann::json;

  std::vector<uint8_t> readBytes(const fs::path& path)
  {
    std::ifstream in(path, std::ios::binary);
    if (!in)
      throwData("cannot open " + path.string());
    return std::vector<uint8_t>(
      std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  }

  void writeBytes(const fs::path& path, const std::vector<uint8_t>& bytes)
  {
    std::ofstream out(path, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out)
      throwData("cannot write " + path.string());
  }

  std::vector<uint8_t> packF32(std::span<const double> values)
  {
    std::vector<uint8_t> out(values.size() * 4);
    for (size_t i = 0; i < values.size(); i++) {
      uint32_t bits = std::bit_cast<uint32_t>(float(values[i]));
      for (int k = 0; k < 4; k++)
        out[4 * i + size_t(k)] = uint8_t(bits >> (8 * k));
    }
    return out;
  }

  std::vector<double> unpackF32(const std::vector<uint8_t>& bytes, size_t expected, const std::string& what)
  {
    if (bytes.size() != expected * 4)
      throwData(
        what + ": expected " + std::to_string(expected * 4) + " bytes, got "
        + std::to_string(bytes.size()));
    std::vector<double> out(expected);
    for (size_t i = 0; i < expected; i++) {
      const uint8_t* b = &bytes[4 * i];
      float f = std::bit_cast<float>(
        uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24);
      if (!std::isfinite(f))
        throwData(what + ": non-finite value at index " + std::to_string(i));
      out[i] = f;
    }
    return out;
  }

  json vecJson(Vec3 v) { return json::array({v.x, v.y, v.z}); }
  Vec3 jsonVec(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

  json readJson(const std::string& path)
  {
    std::ifstream in(path);
    if (!in)
      throwData("cannot open " + path);
    try {
      return json::parse(in);
    }
    catch (const json::exception& e) {
      throwData(path + ": " + e.what());
    }
  }

}  // namespace

void
saveModel(const VoxelModel& model, const std::string& jsonPath)
{
  fs::path base = fs::path(jsonPath).parent_path();
  std::string stem = fs::path(jsonPath).stem().string();
  saveGridFile(model.features, jsonPath, stem + ".features.f32");

  json j = readJson(jsonPath);
  j["density_payload"] = stem + ".density.f32";
  j["density_shift"] = model.densityShift;
  const auto& s = model.net.shape();
  j["net"] = {
    {"feature_channels", s.featureChannels},
    {"view_bands", s.viewBands},
    {"hidden", s.hidden},
    {"hidden_layers", s.hiddenLayers},
    {"payload", stem + ".net.f32"}};
  std::ofstream(jsonPath) << j.dump(2) << "\n";

  writeBytes(base / (stem + ".density.f32"), exportGrid(model.density));
  writeBytes(base / (stem + ".net.f32"), packF32(model.net.params()));
}

VoxelModel
loadModel(const std::string& jsonPath)
{
  fs::path base = fs::path(jsonPath).parent_path();
  VoxelModel m;
  m.features = loadGridFile(jsonPath);
  json j = readJson(jsonPath);
  try {
    GridHeader dh{m.features.dims(), 1, m.features.bounds()};
    m.density = importGrid(dh, readBytes(base / j.at("density_payload").get<std::string>()));
    m.densityShift = j.value("density_shift", 0.0);
    const auto& n = j.at("net");
    ColorNetShape shape{
      n.at("feature_channels").get<int>(), n.at("view_bands").get<int>(),
      n.at("hidden").get<int>(), n.at("hidden_layers").get<int>()};
    m.net = ColorNet(shape);
    auto params = unpackF32(
      readBytes(base / n.at("payload").get<std::string>()), m.net.paramCount(),
      "net payload");
    std::copy(params.begin(), params.end(), m.net.params().begin());
  }
  catch (const json::exception& e) {
    throwData(jsonPath + ": " + e.what());
  }
  m.validate();
  return m;
}

void
saveScene(const Scene& scene, const std::string& jsonPath)
{
  fs::path base = fs::path(jsonPath).parent_path();
  std::string payload = fs::path(jsonPath).stem().string() + ".images.f32";
  json j;
  j["step_voxels"] = scene.render.stepVoxels;
  j["near"] = scene.render.nearT;
  j["far"] = scene.render.farT;
  j["background"] = vecJson(scene.render.background);
  j["images_payload"] = payload;
  std::vector<double> pixels;
  for (size_t i = 0; i < scene.cameras.size(); i++) {
    const auto& c = scene.cameras[i];
    j["cameras"].push_back({
      {"origin", vecJson(c.origin)},
      {"right", vecJson(c.right)},
      {"up", vecJson(c.up)},
      {"forward", vecJson(c.forward)},
      {"focal", c.focal},
      {"width", c.width},
      {"height", c.height}});
    pixels.insert(pixels.end(), scene.images[i].rgb.begin(), scene.images[i].rgb.end());
  }
  std::ofstream(jsonPath) << j.dump(2) << "\n";
  writeBytes(base / payload, packF32(pixels));
}

Scene
loadScene(const std::string& jsonPath)
{
  fs::path base = fs::path(jsonPath).parent_path();
  json j = readJson(jsonPath);
  Scene s;
  try {
    s.render.stepVoxels = j.value("step_voxels", 0.5);
    s.render.nearT = j.value("near", 0.0);
    s.render.farT = j.value("far", 1e30);
    if (j.contains("background"))
      s.render.background = jsonVec(j.at("background"));
    size_t total = 0;
    for (const auto& c : j.at("cameras")) {
      CameraPose cam;
      cam.origin = jsonVec(c.at("origin"));
      cam.right = jsonVec(c.at("right"));
      cam.up = jsonVec(c.at("up"));
      cam.forward = jsonVec(c.at("forward"));
      cam.focal = c.at("focal").get<double>();
      cam.width = c.at("width").get<int>();
      cam.height = c.at("height").get<int>();
      if (cam.width < 1 || cam.height < 1 || cam.width > 1 << 14 || cam.height > 1 << 14)
        throwData(jsonPath + ": camera image size out of range");
      s.cameras.push_back(cam);
      total += size_t(cam.width) * size_t(cam.height) * 3;
    }
    auto pixels = unpackF32(
      readBytes(base / j.at("images_payload").get<std::string>()), total, "scene images");
    size_t next = 0;
    for (const auto& cam : s.cameras) {
      Image img(cam.width, cam.height);
      std::copy_n(pixels.begin() + long(next), img.rgb.size(), img.rgb.begin());
      next += img.rgb.size();
      s.images.push_back(std::move(img));
    }
  }
  catch (const json::exception& e) {
    throwData(jsonPath + ": " + e.what());
  }
  s.validate();
  return s;
}

}  // namespace spc
