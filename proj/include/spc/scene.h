#pragma once

#include "spc/camera.h"
#include "spc/model.h"
#include "spc/render.h"

#include <cstdint>
#include <string>
#include <vector>

namespace spc {

// Training/evaluation views with their ground-truth images.
struct Scene {
  std::vector<CameraPose> cameras;
  std::vector<Image> images;
  RenderOptions render;

  void validate() const;
  size_t pixelCount() const;
  RaySet allRays() const;
};

struct SyntheticConfig {
  uint64_t seed = 1;
  int dims = 32;
  int channels = 12;
  int cameras = 8;
  int imageSize = 32;
  int blobs = 4;
  double featureStd = 1.5;  // per-channel std of the smoothed feature noise
  double featureBlur = 1.5;  // Gaussian blur sigma, voxels
  ColorNetShape net;          // featureChannels is overridden by channels
};

struct SyntheticScene {
  VoxelModel groundTruth;
  Scene scene;
};

// Smooth density blobs with spatially correlated features; the images are
// rendered from the ground-truth model itself. Deterministic per seed.
SyntheticScene makeSyntheticScene(const SyntheticConfig& cfg);

// Stand-in for an imperfectly trained model: the ground truth with
// independent Gaussian noise added to every feature value.
VoxelModel perturbModel(const VoxelModel& gt, uint64_t seed, double featureNoise);

// Cameras on a sphere looking at the origin.
std::vector<CameraPose> orbitCameras(int count, int imageSize, double radius);

double meanPsnr(const VoxelModel& model, const Scene& scene);
double meanSsim(const VoxelModel& model, const Scene& scene);

//============================================================================
// File formats.
//
// Model manifest (JSON): the grid sidecar fields for the feature grid plus
//   "density_payload", "density_shift", and "net": {"feature_channels",
//   "view_bands", "hidden", "hidden_layers", "payload"}; every payload is
//   f32le.
// Scene (JSON): "cameras": [{"origin", "right", "up", "forward", "focal",
//   "width", "height"}], "step_voxels", "near", "far", "background",
//   "images_payload" (f32le, camera-major, HWC).

void saveModel(const VoxelModel& model, const std::string& jsonPath);
VoxelModel loadModel(const std::string& jsonPath);

void saveScene(const Scene& scene, const std::string& jsonPath);
Scene loadScene(const std::string& jsonPath);

}  // namespace spc
