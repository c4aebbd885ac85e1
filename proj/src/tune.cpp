#include "spc/tune.h"

#include "spc/error.h"

#include <cmath>
#include <optional>
#include <random>

namespace spc {

TuneConfig
TuneConfig::desk()
{
  TuneConfig cfg;
  cfg.itersMain = 400;
  cfg.itersPost = 200;
  cfg.raysPerIter = 1024;
  return cfg;
}

double
TuneConfig::decay() const
{
  if (lrDecay > 0)
    return lrDecay;
  int total = itersMain + itersPost;
  return total > 0 ? std::pow(0.1, 1.0 / total) : 1.0;
}

void
TuneConfig::validate() const
{
  if (itersMain < 0 || itersPost < 0 || raysPerIter < 1)
    throwUsage("iteration and ray counts must be positive");
  if (!(lrGrid > 0) || !(lrNet > 0))
    throwUsage("learning rates must be positive");
  if (!(lambda >= 0))
    throwUsage("lambda must be non-negative");
}

LearningRates
lrAt(int64_t step, const TuneConfig& cfg)
{
  double f = std::pow(cfg.decay(), double(step));
  return {cfg.lrGrid * f, cfg.lrNet * f};
}

void
writeTraceCsv(std::ostream& os, const std::vector<TraceRow>& trace)
{
  os << "step,D,R,loss,lr\n";
  os.precision(10);
  for (const auto& r : trace)
    os << r.step << "," << r.distortion << "," << r.rate << "," << r.loss << ","
       << r.lrGrid << "\n";
}

//============================================================================

void
Adam::step(
  std::span<double> params, std::span<const double> grad, double lr,
  const std::vector<uint8_t>* trainable)
{
  constexpr double b1 = 0.9, b2 = 0.99, eps = 1e-8;
  t_++;
  const double c1 = 1.0 - std::pow(b1, double(t_));
  const double c2 = 1.0 - std::pow(b2, double(t_));
  for (size_t i = 0; i < params.size(); i++) {
    if (trainable && !(*trainable)[i])
      continue;
    double g = grad[i];
    m_[i] = b1 * m_[i] + (1 - b1) * g;
    v_[i] = b2 * v_[i] + (1 - b2) * g * g;
    params[i] -= lr * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps);
  }
}

//============================================================================

namespace {

  struct Batch {
    RaySet rays;
    std::vector<Vec3> targets;
  };

  struct PixelPool {
    RaySet rays;
    std::vector<Vec3> colors;

    explicit PixelPool(const Scene& scene)
    {
      rays = scene.allRays();
      for (const auto& img : scene.images)
        for (size_t i = 0; i < size_t(img.width) * size_t(img.height); i++)
          colors.push_back(img.pixel(i));
    }

    void sample(std::mt19937_64& rng, int n, Batch& out) const
    {
      out.rays.resize(size_t(n));
      out.targets.resize(size_t(n));
      for (int i = 0; i < n; i++) {
        size_t k = size_t(rng() % rays.size());
        out.rays[size_t(i)] = rays[k];
        out.targets[size_t(i)] = colors[k];
      }
    }
  };

  std::vector<uint8_t> expandMask(const VoxelMask& m, int channels, bool invert)
  {
    std::vector<uint8_t> out(m.bits.size() * size_t(channels));
    for (size_t v = 0; v < m.bits.size(); v++)
      for (int c = 0; c < channels; c++)
        out[v * size_t(channels) + size_t(c)] = uint8_t((m.bits[v] != 0) != invert);
    return out;
  }

  struct Optimizers {
    Adam features, density, net;
    explicit Optimizers(const VoxelModel& m)
      : features(m.features.values().size()),
        density(m.density.values().size()),
        net(m.net.paramCount())
    {}
  };

  void checkFinite(double loss, int64_t step)
  {
    if (!std::isfinite(loss))
      throwData("finetuning diverged: non-finite loss at step " + std::to_string(step));
  }

}  // namespace

namespace {

  // Copies model into noisy, perturbing the masked feature values by
  // q * u: the noise surrogate mapped back to feature units.
  void applyNoise(
    const VoxelModel& model, const std::vector<uint8_t>& mask, double q,
    const NoiseSource& noise, VoxelModel& noisy)
  {
    auto src = model.features.values();
    auto dst = noisy.features.values();
    for (size_t i = 0; i < src.size(); i++)
      dst[i] = mask[i] ? q * noiseQuantize(src[i], q, noise.at(i)) : src[i];
    std::copy(model.density.values().begin(), model.density.values().end(),
              noisy.density.values().begin());
    std::copy(model.net.params().begin(), model.net.params().end(),
              noisy.net.params().begin());
  }

  double stageLoss(
    const VoxelModel& model, const std::vector<uint8_t>& noiseMask, double q,
    const Scene& scene, std::span<const Ray> rays, std::span<const Vec3> targets,
    const NoiseSource& noise, double lambda, const RateTerm* rate,
    ModelGradients& grads, VoxelModel& noisy, double* distortion = nullptr)
  {
    applyNoise(model, noiseMask, q, noise, noisy);
    grads.clear();
    double d = renderMseWithGrad(noisy, rays, targets, scene.render, grads);
    if (distortion)
      *distortion = d;
    if (rate && lambda > 0)
      for (size_t i = 0; i < grads.features.size(); i++)
        grads.features[i] += lambda * rate->grad[i];
    return rdLoss(rate ? rate->value : 0.0, d, {lambda, RateStage::kMain});
  }

}  // namespace

double
mainStageLoss(
  const VoxelModel& model, const MainStageInputs& in, double lambda,
  std::span<const Ray> rays, std::span<const Vec3> targets,
  const NoiseSource& noise, ModelGradients& grads, double* rate)
{
  const auto mask = expandMask(*in.pruned, model.features.channels(), true);
  VoxelModel noisy = model;
  std::optional<RateTerm> r;
  if (lambda > 0 && in.graph->edgeCount() > 0)
    r = rateMain(model.features, *in.graph);
  if (rate)
    *rate = r ? r->value : 0.0;
  return stageLoss(model, mask, in.quant.qStep, *in.scene, rays, targets, noise, lambda,
                   r ? &*r : nullptr, grads, noisy);
}

double
postStageLoss(
  const VoxelModel& model, const PostStageInputs& in, double lambda,
  std::span<const Ray> rays, std::span<const Vec3> targets,
  const NoiseSource& noise, ModelGradients& grads, double* rate)
{
  const auto mask = expandMask(*in.critical, model.features.channels(), false);
  VoxelModel noisy = model;
  RateTerm r = ratePost(model.features, *in.coarseRecon, *in.critical);
  if (rate)
    *rate = r.value;
  return stageLoss(model, mask, in.quant.qFine, *in.scene, rays, targets, noise, lambda, &r,
                   grads, noisy);
}

std::vector<TraceRow>
finetuneMain(VoxelModel& model, const MainStageInputs& in, const TuneConfig& cfg)
{
  cfg.validate();
  model.validate();
  std::vector<TraceRow> trace;
  if (cfg.itersMain == 0)
    return trace;

  const Scene& scene = *in.scene;
  const int channels = model.features.channels();
  const bool useRate = cfg.lambda > 0 && in.graph->edgeCount() > 0;
  const auto featureMask = expandMask(*in.pruned, channels, true);
  const auto densityMask = expandMask(*in.pruned, 1, true);

  PixelPool pool(scene);
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + 1);
  Optimizers opt(model);
  ModelGradients grads(model);
  Batch batch;
  VoxelModel noisy = model;

  for (int it = 0; it < cfg.itersMain; it++) {
    const int64_t step = it;
    const auto lr = lrAt(step, cfg);
    pool.sample(rng, cfg.raysPerIter, batch);

    double d = 0.0;
    std::optional<RateTerm> rate;
    if (useRate)
      rate = rateMain(model.features, *in.graph);
    double loss = stageLoss(
      model, featureMask, in.quant.qStep, scene, batch.rays, batch.targets,
      NoiseSource(cfg.seed, uint64_t(step)), cfg.lambda, rate ? &*rate : nullptr, grads, noisy,
      &d);
    checkFinite(loss, step);
    double r = rate ? rate->value : 0.0;

    opt.features.step(model.features.values(), grads.features, lr.grid, &featureMask);
    opt.density.step(model.density.values(), grads.density, lr.grid, &densityMask);
    opt.net.step(model.net.params(), grads.net, lr.net);
    trace.push_back({step, d, r, loss, lr.grid});
  }
  return trace;
}

std::vector<TraceRow>
finetunePost(VoxelModel& model, const PostStageInputs& in, const TuneConfig& cfg)
{
  cfg.validate();
  model.validate();
  if (in.critical->popcount() == 0)
    throwData("post finetune: critical set is empty");
  std::vector<TraceRow> trace;
  if (cfg.itersPost == 0)
    return trace;

  const Scene& scene = *in.scene;
  const int channels = model.features.channels();
  const auto featureMask = expandMask(*in.critical, channels, false);
  const auto densityMask = expandMask(*in.pruned, 1, true);

  PixelPool pool(scene);
  std::mt19937_64 rng(cfg.seed * 0x9E3779B97F4A7C15ull + 2);
  Optimizers opt(model);
  ModelGradients grads(model);
  Batch batch;
  VoxelModel noisy = model;

  for (int it = 0; it < cfg.itersPost; it++) {
    const int64_t step = int64_t(cfg.itersMain) + it;
    const auto lr = lrAt(step, cfg);
    pool.sample(rng, cfg.raysPerIter, batch);

    double d = 0.0;
    RateTerm rate = ratePost(model.features, *in.coarseRecon, *in.critical);
    double loss = stageLoss(
      model, featureMask, in.quant.qFine, scene, batch.rays, batch.targets,
      NoiseSource(cfg.seed, uint64_t(step)), cfg.lambda, &rate, grads, noisy, &d);
    checkFinite(loss, step);

    opt.features.step(model.features.values(), grads.features, lr.grid, &featureMask);
    opt.density.step(model.density.values(), grads.density, lr.grid, &densityMask);
    opt.net.step(model.net.params(), grads.net, lr.net);
    trace.push_back({step, d, rate.value, loss, lr.grid});
  }
  return trace;
}

}  // namespace spc
