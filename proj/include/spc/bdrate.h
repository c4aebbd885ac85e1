#pragma once

#include <vector>

namespace spc {

struct RdPoint {
  double sizeBytes = 0.0;
  double psnrDb = 0.0;
  double lambda = 0.0;
};

using RdCurve = std::vector<RdPoint>;

// Keeps points not dominated by any other (smaller-or-equal size with
// higher-or-equal PSNR); result sorted by strictly increasing size.
RdCurve paretoHull(const RdCurve& curve);

// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
class Pchip {
public:
  Pchip(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double integral(double a, double b) const;
  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

private:
  double segmentIntegral(size_t k, double a, double b) const;

  std::vector<double> x_, y_, d_;
};

// Average size difference of `test` against `anchor` at equal PSNR, in
// percent; negative means `test` needs fewer bytes.
double bdRate(const RdCurve& anchor, const RdCurve& test);

}  // namespace spc
