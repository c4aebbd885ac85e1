#pragma once

#include "spc/bdrate.h"
#include "spc/container.h"

#include <ostream>
#include <string>
#include <vector>

namespace spc {

// "5e-5x2^6" -> 5e-5 * 2^k for k = 0..5; "1e-4,4e-4" -> explicit list.
std::vector<double> parseLambdas(const std::string& text);

struct SweepPoint {
  double lambda = 0.0;
  size_t sizeBytes = 0;
  size_t residualBytes = 0;  // coarse + fine residual sections
  double rateEstimate = 0.0;
  double psnrDb = 0.0;
  double ssim = 0.0;
};

// One compress per lambda; points run concurrently, each deterministic.
std::vector<SweepPoint> runSweep(
  const VoxelModel& model, const Scene& scene, const CompressConfig& base,
  const std::vector<double>& lambdas);

RdCurve toCurve(const std::vector<SweepPoint>& points);

void writeCurveCsv(std::ostream& os, const RdCurve& all, const RdCurve& hull);
void writeCurveSvg(std::ostream& os, const RdCurve& all, const RdCurve& hull);

}  // namespace spc
