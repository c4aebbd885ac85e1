#include "spc/error.h"
#include "spc/quant.h"
#include "spc/rate.h"
#include "spc/refgraph.h"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spc;

namespace {

VoxelGrid
randomGrid(Dims d, int channels, uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  VoxelGrid g(d, channels, {});
  for (auto& v : g.values())
    v = n01(rng);
  return g;
}

ReferenceGraph
graphFor(const VoxelGrid& g)
{
  VoxelMask none(g.dims());
  return buildReferenceGraph(quantizeGrid(g, 0.5, 255, none), none);
}

// Central differences of f over every value of g; returns max relative
// error against grad, skipping coordinates within h of an L1 kink.
template<typename F>
double
fdMaxRelError(VoxelGrid g, const std::vector<double>& grad, F f, double h = 1e-6)
{
  double worst = 0;
  for (size_t i = 0; i < g.values().size(); i++) {
    double x = g.values()[i];
    g.values()[i] = x + h;
    double fp = f(g);
    g.values()[i] = x - h;
    double fm = f(g);
    g.values()[i] = x;
    double fd = (fp - fm) / (2 * h);
    double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-8});
    worst = std::max(worst, std::abs(fd - grad[i]) / denom);
  }
  return worst;
}

}  // namespace

TEST_CASE("main rate")
{
  SUBCASE("constant grid")
  {
    VoxelGrid g({4, 4, 4}, 3, {});
    std::fill(g.values().begin(), g.values().end(), 1.25);
    auto r = rateMain(g, graphFor(g));
    CHECK(r.value == 0.0);
    for (double x : r.grad)
      CHECK(x == 0.0);
  }

  SUBCASE("single edge")
  {
    VoxelGrid g({2, 1, 1}, 1, {}, {1.0, 0.25});
    auto r = rateMain(g, graphFor(g));
    CHECK(r.value == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(r.grad[0] == 1.0);  // reference of voxel 1 is voxel 0: |v1 - v0|
    CHECK(r.grad[1] == -1.0);
  }

  SUBCASE("finite differences")
  {
    auto g = randomGrid({8, 8, 8}, 4, 3);
    auto graph = graphFor(g);
    auto r = rateMain(g, graph);
    double err = fdMaxRelError(g, r.grad, [&](const VoxelGrid& x) { return rateMain(x, graph).value; });
    MESSAGE("max relative error " << err);
    CHECK(err < 1e-4);
  }

  SUBCASE("shift invariance and homogeneity")
  {
    auto g = randomGrid({6, 5, 4}, 3, 4);
    auto graph = graphFor(g);
    double base = rateMain(g, graph).value;
    VoxelGrid shifted = g, scaled = g;
    for (size_t v = 0; v < g.voxelCount(); v++)
      for (int c = 0; c < 3; c++) {
        shifted.at(v, c) += 0.37 * (c + 1);
        scaled.at(v, c) *= -2.5;
      }
    CHECK(rateMain(shifted, graph).value == doctest::Approx(base).epsilon(1e-12));
    CHECK(rateMain(scaled, graph).value == doctest::Approx(2.5 * base).epsilon(1e-12));
  }

  SUBCASE("gradient is the mean of incident sign terms")
  {
    auto g = randomGrid({5, 5, 5}, 2, 5);
    auto graph = graphFor(g);
    auto r = rateMain(g, graph);
    std::vector<double> expect(g.values().size(), 0.0);
    double n = double(graph.edgeCount());
    for (auto [v, ref] : graph.edges())
      for (int c = 0; c < 2; c++) {
        double d = g.at(v, c) - g.at(ref, c);
        double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
        expect[v * 2 + size_t(c)] += s / n;
        expect[ref * 2 + size_t(c)] -= s / n;
      }
    for (size_t i = 0; i < expect.size(); i++)
      CHECK(r.grad[i] == doctest::Approx(expect[i]).epsilon(1e-12));
  }

  SUBCASE("empty graph is an error")
  {
    VoxelGrid g({2, 2, 2}, 1, {});
    CHECK_THROWS_AS(rateMain(g, emptyReferenceGraph(g.dims())), Error);
  }
}

TEST_CASE("post rate")
{
  Dims d{4, 4, 4};
  auto coarse = randomGrid(d, 3, 6);
  VoxelMask critical(d);

  CHECK_THROWS_AS(ratePost(coarse, coarse, critical), Error);

  critical.set(5, true);
  CHECK(ratePost(coarse, coarse, critical).value == 0.0);

  VoxelGrid moved = coarse;
  moved.at(5, 0) += 0.1;
  moved.at(5, 1) -= 0.15;
  moved.at(5, 2) += 0.05;
  moved.at(6, 0) += 10.0;  // not critical
  auto r = ratePost(moved, coarse, critical);
  CHECK(r.value == doctest::Approx(0.3).epsilon(1e-12));
  for (size_t v = 0; v < d.count(); v++)
    for (int c = 0; c < 3; c++)
      if (v != 5)
        CHECK(r.grad[v * 3 + size_t(c)] == 0.0);

  std::mt19937_64 rng(7);
  for (size_t v = 0; v < d.count(); v++)
    critical.set(v, rng() % 3 == 0);
  auto post = randomGrid(d, 3, 8);
  auto rp = ratePost(post, coarse, critical);
  double err = fdMaxRelError(post, rp.grad, [&](const VoxelGrid& x) {
    return ratePost(x, coarse, critical).value;
  });
  CHECK(err < 1e-4);
}

TEST_CASE("RD loss")
{
  RateConfig cfg;
  cfg.lambda = 0;
  CHECK(rdLoss(123.0, 0.04, cfg) == 0.04);
  cfg.lambda = 1e-4;
  CHECK(rdLoss(100.0, 0.01, cfg) == doctest::Approx(0.02).epsilon(1e-15));
  double prev = -1;
  for (double l : {0.0, 1e-5, 1e-4, 1e-3, 1.0}) {
    cfg.lambda = l;
    double loss = rdLoss(3.0, 0.5, cfg);
    CHECK(loss >= prev);
    prev = loss;
  }
}
