#include "spc/bdrate.h"
#include "spc/error.h"
#include "spc/sweep.h"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

using namespace spc;

namespace {

// PSNR = a + b * log10(rate), sampled at the given rates.
RdCurve
logLinear(double a, double b, std::initializer_list<double> rates)
{
  RdCurve c;
  for (double r : rates)
    c.push_back({r, a + b * std::log10(r), 0.0});
  return c;
}

std::set<std::pair<double, double>>
bruteForcePareto(const RdCurve& c)
{
  std::set<std::pair<double, double>> keep;
  for (const auto& p : c) {
    bool dominated = false;
    for (const auto& q : c) {
      bool weak = q.sizeBytes <= p.sizeBytes && q.psnrDb >= p.psnrDb;
      bool strict = q.sizeBytes < p.sizeBytes || q.psnrDb > p.psnrDb;
      dominated |= weak && strict;
    }
    if (!dominated)
      keep.insert({p.sizeBytes, p.psnrDb});
  }
  return keep;
}

}  // namespace

TEST_CASE("bd-rate of identical curves is zero")
{
  RdCurve c{{1000, 30, 0}, {1800, 32.5, 0}, {3500, 34, 0}, {9000, 36.2, 0}, {20000, 37, 0}};
  CHECK(bdRate(c, c) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("bd-rate of a half-rate curve is -50%")
{
  RdCurve a{{1000, 30, 0}, {1800, 32.5, 0}, {3500, 34, 0}, {9000, 36.2, 0}, {20000, 37, 0}};
  RdCurve t = a;
  for (auto& p : t)
    p.sizeBytes /= 2;
  CHECK(std::abs(bdRate(a, t) + 50.0) < 0.1);
  CHECK(std::abs(bdRate(t, a) - 100.0) < 0.1);
}

TEST_CASE("bd-rate matches the closed form on log-linear curves")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ua(10, 30), ub(3, 12);
  for (int t = 0; t < 200; t++) {
    double a1 = ua(rng), b1 = ub(rng), a2 = ua(rng), b2 = ub(rng);
    RdCurve A = logLinear(a1, b1, {1e3, 2e3, 4e3, 8e3, 1.6e4, 3.2e4});
    RdCurve B = logLinear(a2, b2, {5e2, 1.1e3, 3e3, 7e3, 2e4, 6e4});
    double lo = std::max(A.front().psnrDb, B.front().psnrDb);
    double hi = std::min(A.back().psnrDb, B.back().psnrDb);
    if (hi - lo < 0.5)
      continue;
    // log10 r = (P - a) / b; integrate the difference over [lo, hi]
    auto prim = [](double a, double b, double p) { return (p * p / 2 - a * p) / b; };
    double diff = (prim(a2, b2, hi) - prim(a2, b2, lo) - prim(a1, b1, hi) + prim(a1, b1, lo))
                  / (hi - lo);
    double expected = 100 * (std::pow(10.0, diff) - 1);
    double got = bdRate(A, B);
    REQUIRE(std::abs(got - expected) <= 1e-3 * std::max(1.0, std::abs(expected)));
  }
}

TEST_CASE("bd-rate sign is antisymmetric")
{
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> shift(-0.3, 0.3);
  RdCurve base{{1000, 30, 0}, {2000, 32, 0}, {4000, 34.5, 0}, {8000, 36, 0}, {16000, 37, 0}};
  for (int t = 0; t < 100; t++) {
    RdCurve other = base;
    for (auto& p : other) {
      p.sizeBytes *= std::pow(10.0, shift(rng));
      p.psnrDb += shift(rng);
    }
    other = paretoHull(other);
    if (other.size() < 4)
      continue;
    double ab = bdRate(base, other), ba = bdRate(other, base);
    if (std::abs(ab) > 1e-9)
      CHECK(std::signbit(ab) != std::signbit(ba));
  }
}

TEST_CASE("bd-rate errors")
{
  RdCurve a = logLinear(10, 8, {1e3, 2e3, 4e3, 8e3});
  RdCurve far = logLinear(40, 8, {1e3, 2e3, 4e3, 8e3});
  CHECK_THROWS_WITH_AS(bdRate(a, far), doctest::Contains("overlap"), Error);
  RdCurve three = logLinear(10, 8, {1e3, 2e3, 4e3});
  CHECK_THROWS_AS(bdRate(a, three), Error);
  RdCurve dominated = a;
  dominated.push_back({1e4, 0, 0});
  dominated[1].psnrDb = 1;  // leaves three hull points
  CHECK_THROWS_AS(bdRate(a, dominated), Error);
  RdCurve zero = a;
  zero[0].sizeBytes = 0;
  CHECK_THROWS_AS(bdRate(a, zero), Error);
}

TEST_CASE("pareto hull matches a brute-force filter")
{
  std::mt19937_64 rng(13);
  for (int t = 0; t < 500; t++) {
    RdCurve c;
    int n = 1 + int(rng() % 12);
    for (int i = 0; i < n; i++)  // coarse values force ties
      c.push_back({double(1 + rng() % 8), double(rng() % 6), double(i)});
    RdCurve hull = paretoHull(c);
    std::set<std::pair<double, double>> got;
    for (size_t i = 0; i < hull.size(); i++) {
      got.insert({hull[i].sizeBytes, hull[i].psnrDb});
      if (i > 0) {
        REQUIRE(hull[i].sizeBytes > hull[i - 1].sizeBytes);
        REQUIRE(hull[i].psnrDb > hull[i - 1].psnrDb);
      }
    }
    REQUIRE(got.size() == hull.size());
    REQUIRE(got == bruteForcePareto(c));
  }
}

TEST_CASE("pchip interpolates, stays monotone and integrates exactly")
{
  Pchip p({0, 1, 2, 3, 4}, {0, 0.1, 0.2, 5, 5.1});
  CHECK(p(2) == 0.2);
  CHECK(p(4) == 5.1);
  double prev = p(0);
  for (int i = 1; i <= 4000; i++) {
    double v = p(i / 1000.0);
    CHECK(v >= prev - 1e-15);
    prev = v;
  }
  // integral against composite Simpson on the piecewise cubic
  auto simpson = [&](double a, double b) {
    const int n = 2000;
    double h = (b - a) / n, s = p(a) + p(b);
    for (int i = 1; i < n; i++)
      s += (i % 2 ? 4 : 2) * p(a + i * h);
    return s * h / 3;
  };
  CHECK(p.integral(0.3, 3.7) == doctest::Approx(simpson(0.3, 3.7)).epsilon(1e-9));
  CHECK(p.integral(1, 1) == 0);
  CHECK_THROWS_AS(p.integral(-1, 2), Error);
  CHECK_THROWS_AS(Pchip({0, 0, 1}, {1, 2, 3}), Error);

  // reproduces straight lines
  Pchip line({0, 1, 3, 7}, {1, 3, 7, 15});
  CHECK(line(5) == doctest::Approx(11));
  CHECK(line.integral(0, 7) == doctest::Approx(56));
}

TEST_CASE("lambda lists")
{
  auto l = parseLambdas("5e-5x2^6");
  REQUIRE(l.size() == 6);
  CHECK(l.front() == 5e-5);
  CHECK(l.back() == doctest::Approx(1.6e-3));
  CHECK(parseLambdas("0,1e-4,4e-4") == std::vector<double>{0, 1e-4, 4e-4});
  CHECK_THROWS_AS(parseLambdas(""), Error);
  CHECK_THROWS_AS(parseLambdas("abc"), Error);
  CHECK_THROWS_AS(parseLambdas("-1"), Error);
  CHECK_THROWS_AS(parseLambdas("1e-4x2^0"), Error);
}

TEST_CASE("curve csv is sorted by size with hull flags")
{
  RdCurve all{{300, 31, 2e-4}, {100, 30, 4e-4}, {200, 29, 3e-4}, {400, 33, 1e-4}};
  std::ostringstream os;
  writeCurveCsv(os, all, paretoHull(all));
  CHECK(os.str()
        == "lambda,size_bytes,psnr_db,on_hull\n"
           "0.0004,100,30.000000,1\n"
           "0.0003,200,29.000000,0\n"
           "0.0002,300,31.000000,1\n"
           "0.0001,400,33.000000,1\n");
  std::ostringstream svg;
  writeCurveSvg(svg, all, paretoHull(all));
  CHECK(svg.str().find("<svg") != std::string::npos);
}
