#pragma once

#include "spc/model.h"
#include "spc/quant.h"
#include "spc/rate.h"
#include "spc/refgraph.h"
#include "spc/scene.h"

#include <cstdint>
#include <ostream>
#include <vector>

namespace spc {

struct TuneConfig {
  double lambda = 1e-4;
  int itersMain = 8000;
  int itersPost = 4000;
  int raysPerIter = 8192;
  double lrGrid = 0.1;
  double lrNet = 1e-3;
  // Per-step decay factor; <= 0 selects the default of one decade over
  // itersMain + itersPost steps.
  double lrDecay = 0.0;
  uint64_t seed = 0;

  // Reduced schedule for desk-scale scenes.
  static TuneConfig desk();

  double decay() const;
  void validate() const;
};

struct LearningRates {
  double grid;
  double net;
};

// Exponential schedule over a global step counter shared by both stages.
LearningRates lrAt(int64_t step, const TuneConfig& cfg);

struct TraceRow {
  int64_t step;
  double distortion;
  double rate;
  double loss;
  double lrGrid;
};

void writeTraceCsv(std::ostream& os, const std::vector<TraceRow>& trace);

// Adam over one flat parameter group. Entries whose mask byte is zero are
// never updated.
class Adam {
public:
  Adam() = default;
  explicit Adam(size_t n) : m_(n, 0.0), v_(n, 0.0) {}

  void step(
    std::span<double> params, std::span<const double> grad, double lr,
    const std::vector<uint8_t>* trainable = nullptr);

private:
  std::vector<double> m_, v_;
  int64_t t_ = 0;
};

// Stage 1: every unpruned parameter is trained under lambda * R_main + D,
// with features noise-quantized at qStep in the forward pass. Pruned voxels
// stay frozen.
struct MainStageInputs {
  const Scene* scene = nullptr;
  const ReferenceGraph* graph = nullptr;
  const VoxelMask* pruned = nullptr;
  QuantParams quant;
};

// One stage-1 objective evaluation on a ray batch: features are replaced
// by x + qStep * u (u drawn from `noise` by value index) on unpruned voxels,
// then D = ray MSE and R = rateMain. Returns lambda * R + D; grads receives
// its gradient (cleared first) and *rate the value of R.
double mainStageLoss(
  const VoxelModel& model, const MainStageInputs& in, double lambda,
  std::span<const Ray> rays, std::span<const Vec3> targets,
  const NoiseSource& noise, ModelGradients& grads, double* rate = nullptr);

std::vector<TraceRow> finetuneMain(
  VoxelModel& model, const MainStageInputs& in, const TuneConfig& cfg);

// Stage 2: features start from the coarse reconstruction; only critical
// feature voxels, unpruned density and the net train, under
// lambda * R_post + D. Critical features are noise-quantized at qFine.
struct PostStageInputs {
  const Scene* scene = nullptr;
  const VoxelGrid* coarseRecon = nullptr;
  const VoxelMask* pruned = nullptr;
  const VoxelMask* critical = nullptr;
  QuantParams quant;
};

// Stage-2 counterpart of mainStageLoss: noise at qFine on critical voxels
// and R = ratePost.
double postStageLoss(
  const VoxelModel& model, const PostStageInputs& in, double lambda,
  std::span<const Ray> rays, std::span<const Vec3> targets,
  const NoiseSource& noise, ModelGradients& grads, double* rate = nullptr);

std::vector<TraceRow> finetunePost(
  VoxelModel& model, const PostStageInputs& in, const TuneConfig& cfg);

}  // namespace spc
