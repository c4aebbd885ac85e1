#pragma once

#include "spc/camera.h"
#include "spc/model.h"

#include <span>
#include <vector>

namespace spc {

struct RenderOptions {
  double stepVoxels = 0.5;  // sample spacing and alpha interval, voxel units
  double nearT = 0.0;
  double farT = 1e30;
  Vec3 background{1, 1, 1};
  // Samples whose compositing weight falls below this skip the colour net
  // and contribute no colour.
  double colorWeightThreshold = 1e-4;
  // Ray marching stops once transmittance drops below this.
  double stopTransmittance = 1e-4;
};

// Thresholds disabled: every sample inside the volume is composited.
RenderOptions exactOptions(RenderOptions base = {});

double softplus(double x);
double densityToAlpha(double raw, double shift, double stepVoxels);

struct Image {
  int width = 0;
  int height = 0;
  std::vector<double> rgb;  // row-major, 3 values per pixel

  Image() = default;
  Image(int w, int h, double fill = 0.0)
    : width(w), height(h), rgb(size_t(w) * size_t(h) * 3, fill)
  {}
  Vec3 pixel(size_t i) const { return {rgb[3 * i], rgb[3 * i + 1], rgb[3 * i + 2]}; }
  void setPixel(size_t i, Vec3 c)
  {
    rgb[3 * i] = c.x;
    rgb[3 * i + 1] = c.y;
    rgb[3 * i + 2] = c.z;
  }
};

// Per-ray record of the forward pass.
struct RayTape {
  struct Sample {
    TrilinearCorners corners;
    double preActivation;  // interpolated raw density + shift
    double alpha;
    double transmittance;  // before this sample
    bool colored;
    size_t featureOffset;  // into features/hidden buffers when colored
    Vec3 rgb;
  };

  std::vector<Sample> samples;
  std::vector<double> features;  // C per colored sample
  std::vector<double> hidden;    // net hidden activations per colored sample
  std::vector<double> viewEnc;
  std::vector<double> viewBias;
  double finalTransmittance = 1.0;
  Vec3 background;
  double stepVoxels = 0.5;

  void clear();
};

// Box-clipped ray parameter range [t0, t1]; false when the ray misses.
bool clipRay(const Bounds& b, const Ray& ray, double& t0, double& t1);

Vec3 traceRay(
  const VoxelModel& model, const Ray& ray, const RenderOptions& opts,
  RayTape* tape = nullptr);

// Reverse pass for one ray given dLoss/dColor.
void backpropRay(
  const VoxelModel& model, const RayTape& tape, Vec3 dColor,
  ModelGradients& grads, std::vector<double>& scratch);

Image renderImage(
  const VoxelModel& model, const CameraPose& cam, const RenderOptions& opts);

ModelGradients renderBackward(
  const VoxelModel& model, const CameraPose& cam, const RenderOptions& opts,
  const Image& pixelGrad);

// Renders rays, returns the mean squared error against targets (averaged
// over rays and colour channels) and accumulates its gradient into grads.
double renderMseWithGrad(
  const VoxelModel& model, std::span<const Ray> rays,
  std::span<const Vec3> targets, const RenderOptions& opts,
  ModelGradients& grads);

// Quality metrics on full-precision images in [0, 1].
constexpr double kPsnrCap = 99.0;
double mse(const Image& a, const Image& b);
double psnr(const Image& a, const Image& b);
double psnrFromMse(double mse);
double ssim(const Image& a, const Image& b);

}  // namespace spc
