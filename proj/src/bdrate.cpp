#include "spc/bdrate.h"

#include "spc/error.h"

#include <algorithm>
#include <cmath>

namespace spc {

RdCurve
paretoHull(const RdCurve& curve)
{
  RdCurve sorted = curve;
  std::stable_sort(sorted.begin(), sorted.end(), [](const RdPoint& a, const RdPoint& b) {
    if (a.sizeBytes != b.sizeBytes)
      return a.sizeBytes < b.sizeBytes;
    return a.psnrDb > b.psnrDb;
  });
  RdCurve out;
  for (const auto& p : sorted) {
    if (!out.empty() && p.psnrDb <= out.back().psnrDb)
      continue;
    out.push_back(p);
  }
  return out;
}

//============================================================================

namespace {

  double pchipEndSlope(double h0, double h1, double m0, double m1)
  {
    double d = ((2 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0)
      return 0.0;
    if (m0 * m1 <= 0 && std::abs(d) > std::abs(3 * m0))
      return 3 * m0;
    return d;
  }

}  // namespace

Pchip::Pchip(std::vector<double> x, std::vector<double> y)
  : x_(std::move(x)), y_(std::move(y))
{
  const size_t n = x_.size();
  if (n < 2 || y_.size() != n)
    throwData("interpolation needs at least two matching samples");
  for (size_t i = 0; i + 1 < n; i++)
    if (!(x_[i] < x_[i + 1]))
      throwData("interpolation abscissae must be strictly increasing");

  std::vector<double> h(n - 1), m(n - 1);
  for (size_t i = 0; i + 1 < n; i++) {
    h[i] = x_[i + 1] - x_[i];
    m[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = m[0];
    return;
  }
  for (size_t i = 1; i + 1 < n; i++) {
    if (m[i - 1] * m[i] <= 0)
      continue;
    double w1 = 2 * h[i] + h[i - 1];
    double w2 = h[i] + 2 * h[i - 1];
    d_[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
  }
  d_[0] = pchipEndSlope(h[0], h[1], m[0], m[1]);
  d_[n - 1] = pchipEndSlope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
}

double
Pchip::operator()(double x) const
{
  size_t k = size_t(
    std::clamp<ptrdiff_t>(std::upper_bound(x_.begin(), x_.end(), x) - x_.begin() - 1,
                          0, ptrdiff_t(x_.size()) - 2));
  double h = x_[k + 1] - x_[k];
  double t = (x - x_[k]) / h;
  double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y_[k] + (t3 - 2 * t2 + t) * h * d_[k]
         + (-2 * t3 + 3 * t2) * y_[k + 1] + (t3 - t2) * h * d_[k + 1];
}

// Exact integral of the Hermite cubic on segment k over [a, b].
double
Pchip::segmentIntegral(size_t k, double a, double b) const
{
  double h = x_[k + 1] - x_[k];
  auto antiderivative = [&](double x) {
    double t = (x - x_[k]) / h;
    double t2 = t * t, t3 = t2 * t, t4 = t3 * t;
    double h00 = t4 / 2 - t3 + t;
    double h10 = t4 / 4 - 2 * t3 / 3 + t2 / 2;
    double h01 = -t4 / 2 + t3;
    double h11 = t4 / 4 - t3 / 3;
    return h * (h00 * y_[k] + h10 * h * d_[k] + h01 * y_[k + 1] + h11 * h * d_[k + 1]);
  };
  return antiderivative(b) - antiderivative(a);
}

double
Pchip::integral(double a, double b) const
{
  if (a < lo() || b > hi() || a > b)
    throwData("integration range outside the interpolation domain");
  double sum = 0.0;
  for (size_t k = 0; k + 1 < x_.size(); k++) {
    double s = std::max(a, x_[k]);
    double e = std::min(b, x_[k + 1]);
    if (s < e)
      sum += segmentIntegral(k, s, e);
  }
  return sum;
}

//============================================================================

namespace {

  Pchip logRateOfPsnr(const RdCurve& curve, const char* which)
  {
    if (curve.size() < 4)
      throwData(std::string(which) + " curve needs at least 4 points");
    for (const auto& p : curve)
      if (!(p.sizeBytes > 0) || !std::isfinite(p.psnrDb))
        throwData(std::string(which) + " curve has a non-positive rate or non-finite PSNR");
    RdCurve hull = paretoHull(curve);
    if (hull.size() < 4)
      throwData(std::string(which) + " curve has fewer than 4 points after hull cleanup");
    std::vector<double> x, y;
    for (const auto& p : hull) {
      x.push_back(p.psnrDb);
      y.push_back(std::log10(p.sizeBytes));
    }
    return Pchip(std::move(x), std::move(y));
  }

}  // namespace

double
bdRate(const RdCurve& anchor, const RdCurve& test)
{
  Pchip a = logRateOfPsnr(anchor, "anchor");
  Pchip t = logRateOfPsnr(test, "test");
  double lo = std::max(a.lo(), t.lo());
  double hi = std::min(a.hi(), t.hi());
  if (!(lo < hi))
    throwData("RD curves have no overlapping PSNR range");
  double meanDiff = (t.integral(lo, hi) - a.integral(lo, hi)) / (hi - lo);
  return 100.0 * (std::pow(10.0, meanDiff) - 1.0);
}

}  // namespace spc
