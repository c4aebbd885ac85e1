#include "spc/sweep.h"

#include "spc/error.h"
#include "spc/parallel.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <sstream>

namespace spc {

std::vector<double>
parseLambdas(const std::string& text)
{
  auto number = [&](const std::string& s) {
    size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    }
    catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || !std::isfinite(v) || v < 0)
      throwUsage("bad lambda value '" + s + "'");
    return v;
  };

  std::vector<double> out;
  static const std::regex geometric(R"(^([^x,]+)x2\^([0-9]+)$)");
  std::smatch m;
  if (std::regex_match(text, m, geometric)) {
    double base = number(m[1]);
    int count = std::stoi(m[2]);
    if (count < 1 || count > 64)
      throwUsage("lambda count must be in 1..64");
    for (int k = 0; k < count; k++)
      out.push_back(std::ldexp(base, k));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(number(item));
  if (out.empty())
    throwUsage("empty lambda list");
  return out;
}

std::vector<SweepPoint>
runSweep(
  const VoxelModel& model, const Scene& scene, const CompressConfig& base,
  const std::vector<double>& lambdas)
{
  std::vector<SweepPoint> points(lambdas.size());
  int workers = std::min<int>(workerCount(), int(lambdas.size()));
  parallelChunks(lambdas.size(), workers, [&](size_t begin, size_t end, int) {
    for (size_t i = begin; i < end; i++) {
      CompressConfig cfg = base;
      cfg.tune.lambda = lambdas[i];
      auto r = compress(model, scene, cfg);
      auto& p = points[i];
      p.lambda = lambdas[i];
      p.sizeBytes = r.bytes.size();
      p.residualBytes = r.stats.sectionBytes[size_t(SectionId::kCoarseResiduals)]
                        + r.stats.sectionBytes[size_t(SectionId::kFineResiduals)];
      p.rateEstimate = r.stats.rateEstimate;
      p.psnrDb = meanPsnr(r.reconstruction, scene);
      p.ssim = meanSsim(r.reconstruction, scene);
    }
  });
  return points;
}

RdCurve
toCurve(const std::vector<SweepPoint>& points)
{
  RdCurve c;
  for (const auto& p : points)
    c.push_back({double(p.sizeBytes), p.psnrDb, p.lambda});
  return c;
}

namespace {

  bool onHull(const RdPoint& p, const RdCurve& hull)
  {
    return std::any_of(hull.begin(), hull.end(), [&](const RdPoint& h) {
      return h.sizeBytes == p.sizeBytes && h.psnrDb == p.psnrDb && h.lambda == p.lambda;
    });
  }

}  // namespace

void
writeCurveCsv(std::ostream& os, const RdCurve& all, const RdCurve& hull)
{
  RdCurve sorted = all;
  std::stable_sort(sorted.begin(), sorted.end(), [](const RdPoint& a, const RdPoint& b) {
    return a.sizeBytes < b.sizeBytes;
  });
  os << "lambda,size_bytes,psnr_db,on_hull\n";
  char buf[128];
  for (const auto& p : sorted) {
    std::snprintf(buf, sizeof buf, "%.6g,%.0f,%.6f,%d\n", p.lambda, p.sizeBytes, p.psnrDb,
                  onHull(p, hull) ? 1 : 0);
    os << buf;
  }
}

void
writeCurveSvg(std::ostream& os, const RdCurve& all, const RdCurve& hull)
{
  if (all.empty())
    return;
  const double w = 480, h = 320, pad = 48;
  double x0 = all[0].sizeBytes, x1 = x0, y0 = all[0].psnrDb, y1 = y0;
  for (const auto& p : all) {
    x0 = std::min(x0, p.sizeBytes), x1 = std::max(x1, p.sizeBytes);
    y0 = std::min(y0, p.psnrDb), y1 = std::max(y1, p.psnrDb);
  }
  if (x1 == x0)
    x1 = x0 + 1;
  if (y1 == y0)
    y1 = y0 + 1;
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (w - 2 * pad); };
  auto py = [&](double y) { return h - pad - (y - y0) / (y1 - y0) * (h - 2 * pad); };

  char buf[256];
  std::snprintf(buf, sizeof buf,
    "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%.0f\" height=\"%.0f\">\n", w, h);
  os << buf << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf,
    "<text x=\"%.0f\" y=\"%.0f\" font-size=\"12\">size (bytes) %.0f .. %.0f</text>\n"
    "<text x=\"4\" y=\"16\" font-size=\"12\">PSNR (dB) %.2f .. %.2f</text>\n",
    pad, h - 12, x0, x1, y0, y1);
  os << buf << "<polyline fill=\"none\" stroke=\"black\" points=\"";
  for (const auto& p : hull) {
    std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(p.sizeBytes), py(p.psnrDb));
    os << buf;
  }
  os << "\"/>\n";
  for (const auto& p : all) {
    std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"3\" fill=\"%s\"/>\n",
                  px(p.sizeBytes), py(p.psnrDb), onHull(p, hull) ? "black" : "gray");
    os << buf;
  }
  os << "</svg>\n";
}

}  // namespace spc
