#include "spc/colornet.h"

#include "spc/error.h"

#include <cmath>
#include <numbers>

namespace spc {

void
encodeView(Vec3 dir, int bands, std::span<double> out)
{
  size_t i = 0;
  for (int k = 0; k < bands; k++) {
    double scale = std::ldexp(std::numbers::pi, k);
    for (int a = 0; a < 3; a++) {
      out[i++] = std::sin(scale * dir[a]);
      out[i++] = std::cos(scale * dir[a]);
    }
  }
}

//============================================================================

ColorNet::ColorNet(ColorNetShape shape) : shape_(shape)
{
  if (shape.featureChannels < 1 || shape.viewBands < 0 || shape.hidden < 1
      || shape.hiddenLayers < 1)
    throwUsage("invalid color net shape");

  size_t offset = 0;
  int in = shape.inputSize();
  for (int l = 0; l <= shape.hiddenLayers; l++) {
    int out = l == shape.hiddenLayers ? 3 : shape.hidden;
    LayerView layer{offset, offset + size_t(in) * size_t(out), in, out};
    offset = layer.bias + size_t(out);
    layers_.push_back(layer);
    in = out;
  }
  params_.assign(offset, 0.0);
}

void
ColorNet::initRandom(std::mt19937_64& rng, double featureGain)
{
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (size_t l = 0; l < layers_.size(); l++) {
    const auto& layer = layers_[l];
    double scale = std::sqrt(2.0 / layer.in);
    for (int o = 0; o < layer.out; o++) {
      for (int i = 0; i < layer.in; i++) {
        double w = scale * gauss(rng);
        if (l == 0 && i < shape_.featureChannels)
          w *= featureGain;
        params_[layer.weight + size_t(o) * size_t(layer.in) + size_t(i)] = w;
      }
      params_[layer.bias + size_t(o)] = 0.1 * gauss(rng);
    }
  }
}

//----------------------------------------------------------------------------

void
ColorNet::viewBias(std::span<const double> viewEnc, std::span<double> out) const
{
  const auto& l0 = layers_[0];
  const int c = shape_.featureChannels;
  for (int o = 0; o < l0.out; o++) {
    const double* w = &params_[l0.weight + size_t(o) * size_t(l0.in) + size_t(c)];
    double acc = params_[l0.bias + size_t(o)];
    for (int i = 0; i < shape_.viewSize(); i++)
      acc += w[i] * viewEnc[i];
    out[o] = acc;
  }
}

Vec3
ColorNet::forward(
  std::span<const double> feature, std::span<const double> viewBias,
  Tape* tape) const
{
  const int h = shape_.hidden;
  const int nh = shape_.hiddenLayers;
  thread_local std::vector<double> scratch;
  std::vector<double>& hidden = tape ? tape->hidden : scratch;
  hidden.resize(size_t(nh) * size_t(h));

  const auto& l0 = layers_[0];
  for (int o = 0; o < h; o++) {
    const double* w = &params_[l0.weight + size_t(o) * size_t(l0.in)];
    double acc = viewBias[o];
    for (int i = 0; i < shape_.featureChannels; i++)
      acc += w[i] * feature[i];
    hidden[o] = acc <= 0 ? 0.0 : acc;  // NaN propagates
  }

  for (int l = 1; l < nh; l++) {
    const auto& layer = layers_[l];
    const double* prev = &hidden[size_t(l - 1) * size_t(h)];
    double* cur = &hidden[size_t(l) * size_t(h)];
    for (int o = 0; o < h; o++) {
      const double* w = &params_[layer.weight + size_t(o) * size_t(h)];
      double acc = params_[layer.bias + size_t(o)];
      for (int i = 0; i < h; i++)
        acc += w[i] * prev[i];
      cur[o] = acc <= 0 ? 0.0 : acc;
    }
  }

  const auto& last = layers_[size_t(nh)];
  const double* prev = &hidden[size_t(nh - 1) * size_t(h)];
  Vec3 rgb;
  for (int o = 0; o < 3; o++) {
    const double* w = &params_[last.weight + size_t(o) * size_t(h)];
    double acc = params_[last.bias + size_t(o)];
    for (int i = 0; i < h; i++)
      acc += w[i] * prev[i];
    rgb[o] = 1.0 / (1.0 + std::exp(-acc));
  }
  if (tape)
    tape->rgb = rgb;
  return rgb;
}

void
ColorNet::backward(
  std::span<const double> feature, std::span<const double> hidden, Vec3 rgb,
  Vec3 dRgb,
  std::span<double> dParams, std::span<double> dFeature,
  std::span<double> dViewBias) const
{
  const int h = shape_.hidden;
  const int nh = shape_.hiddenLayers;
  thread_local std::vector<double> dCur, dPrev;
  dCur.assign(size_t(h), 0.0);
  dPrev.assign(size_t(h), 0.0);

  // Output layer.
  const auto& last = layers_[size_t(nh)];
  const double* hLast = &hidden[size_t(nh - 1) * size_t(h)];
  for (int o = 0; o < 3; o++) {
    double s = rgb[o];
    double g = dRgb[o] * s * (1.0 - s);
    if (g == 0.0)
      continue;
    double* dw = &dParams[last.weight + size_t(o) * size_t(h)];
    const double* w = &params_[last.weight + size_t(o) * size_t(h)];
    for (int i = 0; i < h; i++) {
      dw[i] += g * hLast[i];
      dCur[i] += g * w[i];
    }
    dParams[last.bias + size_t(o)] += g;
  }

  // Hidden layers, top down. dCur holds dLoss/d(post-activation).
  for (int l = nh - 1; l >= 1; l--) {
    const auto& layer = layers_[size_t(l)];
    const double* hCur = &hidden[size_t(l) * size_t(h)];
    const double* hPrev = &hidden[size_t(l - 1) * size_t(h)];
    std::fill(dPrev.begin(), dPrev.end(), 0.0);
    for (int o = 0; o < h; o++) {
      double g = hCur[o] > 0 ? dCur[o] : 0.0;
      if (g == 0.0)
        continue;
      double* dw = &dParams[layer.weight + size_t(o) * size_t(h)];
      const double* w = &params_[layer.weight + size_t(o) * size_t(h)];
      for (int i = 0; i < h; i++) {
        dw[i] += g * hPrev[i];
        dPrev[i] += g * w[i];
      }
      dParams[layer.bias + size_t(o)] += g;
    }
    std::swap(dCur, dPrev);
  }

  // First layer, feature columns only.
  const auto& l0 = layers_[0];
  const double* h0 = &hidden[0];
  for (int o = 0; o < h; o++) {
    double g = h0[o] > 0 ? dCur[o] : 0.0;
    if (g == 0.0)
      continue;
    double* dw = &dParams[l0.weight + size_t(o) * size_t(l0.in)];
    const double* w = &params_[l0.weight + size_t(o) * size_t(l0.in)];
    for (int i = 0; i < shape_.featureChannels; i++) {
      dw[i] += g * feature[i];
      dFeature[i] += g * w[i];
    }
    dViewBias[o] += g;
  }
}

void
ColorNet::accumulateViewGrad(
  std::span<const double> viewEnc, std::span<const double> dViewBias,
  std::span<double> dParams) const
{
  const auto& l0 = layers_[0];
  const int c = shape_.featureChannels;
  for (int o = 0; o < l0.out; o++) {
    double g = dViewBias[o];
    if (g == 0.0)
      continue;
    double* dw = &dParams[l0.weight + size_t(o) * size_t(l0.in) + size_t(c)];
    for (int i = 0; i < shape_.viewSize(); i++)
      dw[i] += g * viewEnc[i];
    dParams[l0.bias + size_t(o)] += g;
  }
}

Vec3
ColorNet::evaluate(std::span<const double> input) const
{
  const int c = shape_.featureChannels;
  std::vector<double> bias(size_t(shape_.hidden));
  viewBias(input.subspan(size_t(c)), bias);
  return forward(input.first(size_t(c)), bias, nullptr);
}

}  // namespace spc
