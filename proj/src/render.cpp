#include "spc/render.h"

#include "spc/error.h"
#include "spc/parallel.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spc {

RenderOptions
exactOptions(RenderOptions base)
{
  base.colorWeightThreshold = 0.0;
  base.stopTransmittance = 0.0;
  return base;
}

double
softplus(double x)
{
  return x > 30 ? x : std::log1p(std::exp(x));
}

double
densityToAlpha(double raw, double shift, double stepVoxels)
{
  return -std::expm1(-softplus(raw + shift) * stepVoxels);
}

void
RayTape::clear()
{
  samples.clear();
  features.clear();
  hidden.clear();
  finalTransmittance = 1.0;
}

//============================================================================

bool
clipRay(const Bounds& b, const Ray& ray, double& t0, double& t1)
{
  for (int a = 0; a < 3; a++) {
    if (ray.dir[a] == 0.0) {
      if (ray.origin[a] < b.lo[a] || ray.origin[a] > b.hi[a])
        return false;
      continue;
    }
    double inv = 1.0 / ray.dir[a];
    double ta = (b.lo[a] - ray.origin[a]) * inv;
    double tb = (b.hi[a] - ray.origin[a]) * inv;
    if (ta > tb)
      std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
  }
  return t0 <= t1;
}

namespace {

  double stepWorld(const VoxelGrid& g, double stepVoxels)
  {
    const auto& b = g.bounds();
    int n[3] = {g.dims().x, g.dims().y, g.dims().z};
    double spacing = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; a++)
      if (n[a] > 1)
        spacing = std::min(spacing, (b.hi[a] - b.lo[a]) / (n[a] - 1));
    if (!std::isfinite(spacing))
      spacing = b.hi.x - b.lo.x;
    return stepVoxels * spacing;
  }

  double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Vec3
traceRay(
  const VoxelModel& model, const Ray& ray, const RenderOptions& opts,
  RayTape* tape)
{
  const auto& density = model.density;
  const auto& features = model.features;
  const auto& shape = model.net.shape();
  const int channels = features.channels();

  thread_local RayTape localTape;
  RayTape& rt = tape ? *tape : localTape;
  rt.clear();
  rt.background = opts.background;
  rt.stepVoxels = opts.stepVoxels;

  double t0 = opts.nearT, t1 = opts.farT;
  if (!clipRay(density.bounds(), ray, t0, t1))
    return opts.background;

  rt.viewEnc.resize(size_t(shape.viewSize()));
  encodeView(ray.dir, shape.viewBands, rt.viewEnc);
  rt.viewBias.resize(size_t(shape.hidden));
  model.net.viewBias(rt.viewEnc, rt.viewBias);

  const double step = stepWorld(density, opts.stepVoxels);
  const size_t hiddenSize = size_t(shape.hidden) * size_t(shape.hiddenLayers);
  ColorNet::Tape netTape;
  std::vector<double> feat(static_cast<size_t>(channels));

  Vec3 color{0, 0, 0};
  double trans = 1.0;
  for (size_t k = 0;; k++) {
    double t = t0 + double(k) * step;
    if (t > t1)
      break;
    Vec3 p = density.bounds().clamp(ray.origin + ray.dir * t);

    RayTape::Sample s;
    s.corners = density.corners(p);
    double raw = 0.0;
    for (int c = 0; c < 8; c++)
      raw += s.corners.weight[c] * density.values()[s.corners.voxel[c]];
    s.preActivation = raw + model.densityShift;
    s.alpha = -std::expm1(-softplus(s.preActivation) * opts.stepVoxels);
    if (!std::isfinite(s.alpha))
      throwData("non-finite density along ray");
    s.transmittance = trans;
    double weight = trans * s.alpha;
    s.colored = weight >= opts.colorWeightThreshold;
    s.featureOffset = 0;
    s.rgb = {0, 0, 0};
    if (s.colored) {
      std::fill(feat.begin(), feat.end(), 0.0);
      for (int c = 0; c < 8; c++) {
        double w = s.corners.weight[c];
        if (w == 0.0)
          continue;
        auto src = features.voxel(s.corners.voxel[c]);
        for (int ch = 0; ch < channels; ch++)
          feat[ch] += w * src[ch];
      }
      s.rgb = model.net.forward(feat, rt.viewBias, &netTape);
      s.featureOffset = rt.features.size() / size_t(channels);
      rt.features.insert(rt.features.end(), feat.begin(), feat.end());
      rt.hidden.insert(rt.hidden.end(), netTape.hidden.begin(), netTape.hidden.begin() + long(hiddenSize));
      color = color + s.rgb * weight;
    }
    rt.samples.push_back(s);
    trans *= 1.0 - s.alpha;
    if (trans < opts.stopTransmittance)
      break;
  }
  rt.finalTransmittance = trans;
  return color + opts.background * trans;
}

void
backpropRay(
  const VoxelModel& model, const RayTape& tape, Vec3 dColor,
  ModelGradients& grads, std::vector<double>& scratch)
{
  if (tape.samples.empty())
    return;

  const auto& shape = model.net.shape();
  const int channels = model.features.channels();
  const size_t hiddenSize = size_t(shape.hidden) * size_t(shape.hiddenLayers);
  const double stepVoxels = tape.stepVoxels;

  scratch.assign(size_t(shape.hidden) + size_t(channels), 0.0);
  std::span<double> dViewBias(scratch.data(), size_t(shape.hidden));
  std::span<double> dFeature(scratch.data() + shape.hidden, size_t(channels));

  Vec3 behind = tape.background;
  for (size_t i = tape.samples.size(); i-- > 0;) {
    const auto& s = tape.samples[i];
    const double weight = s.transmittance * s.alpha;
    double dAlpha = s.transmittance * dot(dColor, s.rgb - behind);

    if (s.colored) {
      std::fill(dFeature.begin(), dFeature.end(), 0.0);
      std::span<const double> feat(
        tape.features.data() + s.featureOffset * size_t(channels), size_t(channels));
      std::span<const double> hidden(
        tape.hidden.data() + s.featureOffset * hiddenSize, hiddenSize);
      model.net.backward(
        feat, hidden, s.rgb, dColor * weight, grads.net, dFeature, dViewBias);
      for (int c = 0; c < 8; c++) {
        double w = s.corners.weight[c];
        if (w == 0.0)
          continue;
        double* dst = &grads.features[s.corners.voxel[c] * size_t(channels)];
        for (int ch = 0; ch < channels; ch++)
          dst[ch] += w * dFeature[ch];
      }
    }

    behind = s.rgb * s.alpha + behind * (1.0 - s.alpha);
    double dPre = dAlpha * stepVoxels * (1.0 - s.alpha) * sigmoid(s.preActivation);
    for (int c = 0; c < 8; c++)
      grads.density[s.corners.voxel[c]] += dPre * s.corners.weight[c];
  }
  model.net.accumulateViewGrad(tape.viewEnc, dViewBias, grads.net);
}

//============================================================================

Image
renderImage(const VoxelModel& model, const CameraPose& cam, const RenderOptions& opts)
{
  model.validate();
  Image img(cam.width, cam.height);
  size_t n = size_t(cam.width) * size_t(cam.height);
  parallelChunks(n, workerCount(), [&](size_t begin, size_t end, int) {
    for (size_t i = begin; i < end; i++) {
      Ray ray = pixelRay(cam, int(i % size_t(cam.width)), int(i / size_t(cam.width)));
      Vec3 c = traceRay(model, ray, opts);
      if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z))
        throwData("non-finite colour on ray " + std::to_string(i));
      img.setPixel(i, c);
    }
  });
  return img;
}

ModelGradients
renderBackward(
  const VoxelModel& model, const CameraPose& cam, const RenderOptions& opts,
  const Image& pixelGrad)
{
  model.validate();
  if (pixelGrad.width != cam.width || pixelGrad.height != cam.height)
    throwData("pixel gradient does not match the camera image size");
  ModelGradients grads(model);
  RayTape tape;
  std::vector<double> scratch;
  size_t n = size_t(cam.width) * size_t(cam.height);
  for (size_t i = 0; i < n; i++) {
    Ray ray = pixelRay(cam, int(i % size_t(cam.width)), int(i / size_t(cam.width)));
    traceRay(model, ray, opts, &tape);
    backpropRay(model, tape, pixelGrad.pixel(i), grads, scratch);
  }
  return grads;
}

double
renderMseWithGrad(
  const VoxelModel& model, std::span<const Ray> rays,
  std::span<const Vec3> targets, const RenderOptions& opts,
  ModelGradients& grads)
{
  if (rays.size() != targets.size())
    throwInternal("ray and target counts differ");
  if (rays.empty())
    return 0.0;

  const int parts = std::min<int>(kReductionPartitions, int(rays.size()));
  const double norm = 2.0 / (3.0 * double(rays.size()));
  std::vector<ModelGradients> local(size_t(parts - 1), ModelGradients(model));
  std::vector<double> partial(size_t(parts), 0.0);

  parallelPartitions(rays.size(), parts, [&](size_t begin, size_t end, int w) {
    ModelGradients& g = w == 0 ? grads : local[size_t(w - 1)];
    RayTape tape;
    std::vector<double> scratch;
    double sum = 0.0;
    for (size_t i = begin; i < end; i++) {
      Vec3 c = traceRay(model, rays[i], opts, &tape);
      if (!std::isfinite(c.x) || !std::isfinite(c.y) || !std::isfinite(c.z))
        throwData("non-finite colour on ray " + std::to_string(i));
      Vec3 diff = c - targets[i];
      double sq = dot(diff, diff);
      sum += sq;
      backpropRay(model, tape, diff * norm, g, scratch);
    }
    partial[size_t(w)] = sum;
  });
  for (auto& g : local)
    grads.add(g);

  double total = 0.0;
  for (double s : partial)
    total += s;
  return total / (3.0 * double(rays.size()));
}

//============================================================================

double
mse(const Image& a, const Image& b)
{
  if (a.width != b.width || a.height != b.height)
    throwData("image dimensions differ");
  if (a.rgb.empty())
    return 0.0;
  double sum = 0.0;
  for (size_t i = 0; i < a.rgb.size(); i++) {
    double d = a.rgb[i] - b.rgb[i];
    sum += d * d;
  }
  return sum / double(a.rgb.size());
}

double
psnrFromMse(double m)
{
  if (m <= 0.0)
    return kPsnrCap;
  return std::min(kPsnrCap, -10.0 * std::log10(m));
}

double
psnr(const Image& a, const Image& b)
{
  return psnrFromMse(mse(a, b));
}

double
ssim(const Image& a, const Image& b)
{
  if (a.width != b.width || a.height != b.height)
    throwData("image dimensions differ");
  int size = std::min({11, a.width, a.height});
  if (size % 2 == 0)
    size--;
  if (size < 1)
    throwData("image too small for SSIM");

  std::vector<double> win(static_cast<size_t>(size));
  double wsum = 0.0;
  for (int i = 0; i < size; i++) {
    double x = i - (size - 1) / 2.0;
    win[size_t(i)] = std::exp(-x * x / (2.0 * 1.5 * 1.5));
    wsum += win[size_t(i)];
  }
  for (auto& w : win)
    w /= wsum;

  const double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
  const int ow = a.width - size + 1, oh = a.height - size + 1;
  double total = 0.0;
  for (int ch = 0; ch < 3; ch++) {
    for (int y = 0; y < oh; y++)
      for (int x = 0; x < ow; x++) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int dy = 0; dy < size; dy++)
          for (int dx = 0; dx < size; dx++) {
            double w = win[size_t(dy)] * win[size_t(dx)];
            size_t idx = (size_t(y + dy) * size_t(a.width) + size_t(x + dx)) * 3 + size_t(ch);
            double va = a.rgb[idx], vb = b.rgb[idx];
            mx += w * va;
            my += w * vb;
            sxx += w * va * va;
            syy += w * vb * vb;
            sxy += w * va * vb;
          }
        sxx -= mx * mx;
        syy -= my * my;
        sxy -= mx * my;
        total += ((2 * mx * my + c1) * (2 * sxy + c2))
          / ((mx * mx + my * my + c1) * (sxx + syy + c2));
      }
  }
  return total / (3.0 * ow * oh);
}

}  // namespace spc
