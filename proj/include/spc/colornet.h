#pragma once

#include "spc/vec3.h"

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace spc {

struct ColorNetShape {
  int featureChannels = 12;
  int viewBands = 4;
  int hidden = 64;
  int hiddenLayers = 2;

  int viewSize() const { return 6 * viewBands; }
  int inputSize() const { return featureChannels + viewSize(); }

  friend bool operator==(const ColorNetShape&, const ColorNetShape&) = default;
};

// Sinusoidal encoding of a unit view direction: sin and cos of
// 2^k * pi * d for every band k and axis.
void encodeView(Vec3 dir, int bands, std::span<double> out);

// Shallow MLP mapping (sampled feature, encoded view) to RGB. ReLU hidden
// layers, sigmoid output. All weights live in one flat parameter vector,
// layer by layer, each layer stored as a row-major (out x in) matrix
// followed by its bias.
class ColorNet {
public:
  ColorNet() = default;
  explicit ColorNet(ColorNetShape shape);

  const ColorNetShape& shape() const { return shape_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }
  size_t paramCount() const { return params_.size(); }

  void initRandom(std::mt19937_64& rng, double featureGain = 1.0);

  // Activations kept for the reverse pass.
  struct Tape {
    std::vector<double> hidden;  // hiddenLayers * hidden, post-ReLU
    Vec3 rgb;
  };

  // First-layer contribution of the view encoding plus the first bias; it
  // is constant along a ray.
  void viewBias(std::span<const double> viewEnc, std::span<double> out) const;

  // Evaluates the net for one sample given the precomputed view bias.
  Vec3 forward(
    std::span<const double> feature, std::span<const double> viewBias,
    Tape* tape) const;

  // Accumulates parameter gradients (excluding the view part of the first
  // layer, see accumulateViewGrad) and the gradient w.r.t. the feature
  // input. dViewBias receives dLoss/d(first-layer pre-activation).
  void backward(
    std::span<const double> feature, std::span<const double> hidden, Vec3 rgb,
    Vec3 dRgb,
    std::span<double> dParams, std::span<double> dFeature,
    std::span<double> dViewBias) const;

  // Folds the per-ray first-layer pre-activation gradient into the view
  // weights and the first bias.
  void accumulateViewGrad(
    std::span<const double> viewEnc, std::span<const double> dViewBias,
    std::span<double> dParams) const;

  // Full evaluation from a concatenated input vector; used by tests.
  Vec3 evaluate(std::span<const double> input) const;

private:
  struct LayerView {
    size_t weight;  // offset of weights
    size_t bias;    // offset of biases
    int in, out;
  };

  ColorNetShape shape_;
  std::vector<LayerView> layers_;
  std::vector<double> params_;
};

}  // namespace spc
