#include "spc/error.h"
#include "spc/predict.h"
#include "spc/refgraph.h"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace spc;

namespace {

VoxelMask
randomMask(Dims d, double p, uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution b(p);
  VoxelMask m(d);
  for (size_t v = 0; v < d.count(); v++)
    m.set(v, b(rng));
  return m;
}

QuantizedGrid
randomQGrid(Dims d, int channels, const VoxelMask& pruned, uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(-255, 255);
  QuantizedGrid g{d, channels, std::vector<int32_t>(d.count() * size_t(channels), 0)};
  for (size_t v = 0; v < d.count(); v++)
    if (!pruned[v])
      for (int c = 0; c < channels; c++)
        g.voxel(v)[c] = u(rng);
  return g;
}

// Smoothed white noise along x, y and z with a separable Gaussian blur.
VoxelGrid
smoothNoise(Dims d, int channels, double sigma, uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n01;
  VoxelGrid g(d, channels, {});
  for (auto& v : g.values())
    v = n01(rng);
  int r = int(std::ceil(3 * sigma));
  std::vector<double> k(size_t(2 * r + 1));
  double ks = 0;
  for (int i = -r; i <= r; i++)
    ks += k[size_t(i + r)] = std::exp(-0.5 * i * i / (sigma * sigma));
  for (auto& w : k)
    w /= ks;
  for (int axis = 0; axis < 3; axis++) {
    VoxelGrid out = g;
    for (size_t v = 0; v < d.count(); v++) {
      auto c = d.coord(v);
      int n = axis == 0 ? d.x : (axis == 1 ? d.y : d.z);
      for (int ch = 0; ch < channels; ch++) {
        double acc = 0;
        for (int i = -r; i <= r; i++) {
          auto cc = c;
          cc[size_t(axis)] = std::clamp(c[size_t(axis)] + i, 0, n - 1);
          acc += k[size_t(i + r)] * g.at(d.index(cc[0], cc[1], cc[2]), ch);
        }
        out.at(v, ch) = acc;
      }
    }
    g = out;
  }
  double var = 0;
  for (double v : g.values())
    var += v * v;
  double scale = 1.5 / std::sqrt(var / double(g.values().size()));
  for (auto& v : g.values())
    v *= scale;
  return g;
}

}  // namespace

TEST_CASE("residuals")
{
  SUBCASE("constant grid leaves residuals only on isolated voxels")
  {
    Dims d{4, 4, 4};
    VoxelMask none(d);
    QuantizedGrid g{d, 2, std::vector<int32_t>(d.count() * 2, 9)};
    auto graph = buildReferenceGraph(g, none);
    auto y = computeResiduals(g, graph, none);
    CHECK(y[0] == 9);
    CHECK(y[1] == 9);
    for (size_t i = 2; i < y.size(); i++)
      CHECK(y[i] == 0);
  }

  SUBCASE("single edge arithmetic")
  {
    Dims d{2, 1, 1};
    VoxelMask none(d);
    QuantizedGrid g{d, 1, {3, 5}};
    auto graph = buildReferenceGraph(g, none);
    auto y = computeResiduals(g, graph, none);
    CHECK(y == std::vector<int32_t>{3, 2});
  }

  SUBCASE("pruned voxels carry no residual")
  {
    Dims d{3, 3, 3};
    auto pruned = randomMask(d, 0.4, 5);
    auto g = randomQGrid(d, 3, pruned, 6);
    auto y = computeResiduals(g, buildReferenceGraph(g, pruned), pruned);
    CHECK(y.size() == (d.count() - pruned.popcount()) * 3);
  }

  SUBCASE("round trip is exact")
  {
    for (uint64_t seed = 0; seed < 20; seed++) {
      Dims d{7, 6, 5};
      auto pruned = randomMask(d, 0.3, seed);
      auto g = randomQGrid(d, 4, pruned, seed + 50);
      auto graph = buildReferenceGraph(g, pruned);
      auto y = computeResiduals(g, graph, pruned);
      for (int32_t r : y)
        CHECK(std::abs(r) <= 2 * 255);
      CHECK(reconstructQuantized(y, graph, pruned, 4) == g);
      auto none = emptyReferenceGraph(d);
      CHECK(reconstructQuantized(computeResiduals(g, none, pruned), none, pruned, 4) == g);
    }
  }

  SUBCASE("forward reference is an invariant violation")
  {
    Dims d{2, 1, 1};
    VoxelMask none(d);
    ReferenceGraph bad{d, {0, kNoReference}};  // voxel 0 refers to x = -1
    std::vector<int32_t> y{1, 2};
    CHECK_THROWS_AS(reconstructQuantized(y, bad, none, 1), Error);
  }
}

TEST_CASE("reconstruction")
{
  SUBCASE("zeros decode to zeros")
  {
    Dims d{3, 3, 3};
    VoxelMask none(d);
    ResidualPlanes planes{2, std::vector<int32_t>(d.count() * 2, 0), {}};
    auto g = reconstruct(planes, buildReferenceGraph(
                           QuantizedGrid{d, 2, std::vector<int32_t>(d.count() * 2, 0)}, none),
                         none, VoxelMask(d), {}, {});
    for (double v : g.values())
      CHECK(v == 0.0);
  }

  SUBCASE("coarse plus fine on one voxel")
  {
    Dims d{1, 1, 1};
    VoxelMask none(d), critical(d);
    critical.set(0, true);
    ResidualPlanes planes{1, {2}, {1}};
    auto g = reconstruct(planes, emptyReferenceGraph(d), none, critical, {}, {});
    CHECK(g.at(0, 0) == 1.125);
  }

  SUBCASE("fine residual definition")
  {
    Dims d{2, 1, 1};
    VoxelGrid coarse(d, 1, {}), post(d, 1, {});
    coarse.at(0, 0) = 1.0, post.at(0, 0) = 1.3;
    coarse.at(1, 0) = 0.5, post.at(1, 0) = 9.0;
    VoxelMask critical(d);
    critical.set(0, true);
    auto f = computeFineResiduals(post, coarse, critical, {});
    REQUIRE(f.size() == 1);
    CHECK(f[0] == quantize(0.3, 0.125, 255));
  }

  SUBCASE("decoder equals encoder on random grids")
  {
    for (uint64_t seed = 0; seed < 5; seed++) {
      Dims d{16, 16, 16};
      auto pruned = randomMask(d, 0.5, seed);
      auto g = randomQGrid(d, 12, pruned, seed + 9);
      VoxelMask critical(d);
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<int> fu(-255, 255);
      for (size_t v = 0; v < d.count(); v++)
        critical.set(v, !pruned[v] && (rng() & 3) == 0);
      std::vector<int32_t> fine(critical.popcount() * 12);
      for (auto& f : fine)
        f = fu(rng);
      QuantParams qp;
      auto graph = buildReferenceGraph(g, pruned);
      ResidualPlanes planes{12, computeResiduals(g, graph, pruned), fine};
      auto encoderSide = dequantizeGrid(g, fine, critical, qp, {});
      auto decoderSide = reconstruct(planes, graph, pruned, critical, qp, {});
      REQUIRE(encoderSide.values().size() == decoderSide.values().size());
      bool same = std::equal(encoderSide.values().begin(), encoderSide.values().end(),
                             decoderSide.values().begin());
      CHECK(same);
      for (size_t v = 0; v < d.count(); v++)
        if (pruned[v])
          for (int c = 0; c < 12; c++)
            CHECK(decoderSide.at(v, c) == 0.0);
    }
  }
}

TEST_CASE("prediction lowers residual energy on smooth grids")
{
  Dims d{24, 24, 24};
  VoxelMask none(d);
  auto g = smoothNoise(d, 4, 1.5, 77);
  auto q = quantizeGrid(g, 0.5, 255, none);
  auto y = computeResiduals(q, buildReferenceGraph(q, none), none);
  auto variance = [](auto begin, auto end) {
    double n = double(end - begin), m = 0, s = 0;
    for (auto it = begin; it != end; ++it)
      m += *it;
    m /= n;
    for (auto it = begin; it != end; ++it)
      s += (*it - m) * (*it - m);
    return s / n;
  };
  double vq = variance(q.values.begin(), q.values.end());
  double vy = variance(y.begin(), y.end());
  MESSAGE("quantized variance " << vq << ", residual variance " << vy);
  CHECK(vy < 0.25 * vq);
}
