#include "spc/error.h"
#include "spc/refgraph.h"

#include <doctest.h>

#include <cstdlib>
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
randomQGrid(Dims d, int channels, int range, uint64_t seed, const VoxelMask& pruned)
{
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(-range, range);
  QuantizedGrid g{d, channels, std::vector<int32_t>(d.count() * size_t(channels))};
  for (size_t v = 0; v < d.count(); v++)
    for (int c = 0; c < channels; c++)
      g.voxel(v)[c] = pruned[v] ? 0 : u(rng);
  return g;
}

}  // namespace

TEST_CASE("candidate enumeration")
{
  Dims d{4, 4, 4};
  VoxelMask none(d);
  for (const auto& s : candidates(none, {0, 0, 0}))
    CHECK_FALSE(s.available);

  auto c = candidates(none, {1, 0, 0});
  CHECK(c[0].available);
  CHECK(c[0].coord == std::array<int, 3>{0, 0, 0});
  for (int s = 1; s < kCandidateSlots; s++)
    CHECK_FALSE(c[size_t(s)].available);

  // brute-force enumeration over random masks
  for (uint64_t seed = 0; seed < 20; seed++) {
    Dims dd{6, 5, 7};
    auto pruned = randomMask(dd, 0.3, seed);
    for (size_t v = 0; v < dd.count(); v++) {
      auto xyz = dd.coord(v);
      auto got = candidates(pruned, xyz);
      uint8_t bits = availableSlots(pruned, v);
      for (int s = 0; s < kCandidateSlots; s++) {
        int i = xyz[0] + kCandidateOffsets[size_t(s)][0];
        int j = xyz[1] + kCandidateOffsets[size_t(s)][1];
        int k = xyz[2] + kCandidateOffsets[size_t(s)][2];
        bool expect = dd.contains(i, j, k) && !pruned[dd.index(i, j, k)];
        CHECK(got[size_t(s)].available == expect);
        CHECK(bool(bits >> s & 1) == expect);
        if (expect)
          CHECK(got[size_t(s)].voxel == dd.index(i, j, k));
      }
    }
  }
}

TEST_CASE("reference selection")
{
  SUBCASE("constant grid picks the lowest available slot")
  {
    Dims d{4, 3, 5};
    VoxelMask none(d);
    QuantizedGrid g{d, 3, std::vector<int32_t>(d.count() * 3, 7)};
    auto graph = buildReferenceGraph(g, none);
    for (size_t v = 0; v < d.count(); v++) {
      auto c = d.coord(v);
      if (v == 0)
        CHECK(graph.slot[v] == kNoReference);
      else if (c[0] > 0)
        CHECK(graph.slot[v] == 0);
      else if (c[1] > 0)
        CHECK(graph.slot[v] == 1);
      else
        CHECK(graph.slot[v] == 2);
    }
  }

  SUBCASE("SAD arithmetic and tie-break")
  {
    // voxel (1,0,1): slot 0 is (0,0,1), slot 2 is (1,0,0)
    Dims d{2, 1, 2};
    VoxelMask pruned(d);
    pruned.set(d.index(0, 0, 0), true);  // keep only slots 0 and 2
    QuantizedGrid g{d, 1, std::vector<int32_t>(4, 0)};
    g.voxel(d.index(0, 0, 1))[0] = 5;
    g.voxel(d.index(1, 0, 0))[0] = 7;
    size_t target = d.index(1, 0, 1);
    REQUIRE(availableSlots(pruned, target) == 0b101);

    g.voxel(target)[0] = 6;
    CHECK(buildReferenceGraph(g, pruned).slot[target] == 0);
    g.voxel(target)[0] = 7;
    CHECK(buildReferenceGraph(g, pruned).slot[target] == 2);
  }

  SUBCASE("argmin oracle, acyclicity and availability")
  {
    for (uint64_t seed = 0; seed < 10; seed++) {
      Dims d{8, 8, 8};
      auto pruned = randomMask(d, 0.25, seed);
      auto g = randomQGrid(d, 4, 3, seed + 100, pruned);
      auto graph = buildReferenceGraph(g, pruned);
      size_t edges = 0;
      for (size_t v = 0; v < d.count(); v++) {
        if (pruned[v]) {
          CHECK(graph.slot[v] == kNoReference);
          continue;
        }
        auto cand = candidates(pruned, d.coord(v));
        int best = kNoReference;
        long bestSad = 0;
        for (int s = 0; s < kCandidateSlots; s++) {
          if (!cand[size_t(s)].available)
            continue;
          long sad = 0;
          for (int c = 0; c < 4; c++)
            sad += std::labs(long(g.voxel(v)[c]) - g.voxel(cand[size_t(s)].voxel)[c]);
          if (best == kNoReference || sad < bestSad)
            best = s, bestSad = sad;
        }
        CHECK(graph.slot[v] == best);
        if (best != kNoReference) {
          edges++;
          size_t r = graph.reference(v);
          CHECK(r < v);
          CHECK_FALSE(pruned[r]);
        }
        else {
          CHECK(graph.reference(v) == SIZE_MAX);
        }
      }
      CHECK(graph.edgeCount() == edges);
      CHECK(graph.edges().size() == edges);
    }
  }

  SUBCASE("identical across thread counts")
  {
    Dims d{12, 11, 10};
    auto pruned = randomMask(d, 0.2, 3);
    auto g = randomQGrid(d, 5, 4, 4, pruned);
    setenv("SPCGRID_THREADS", "1", 1);
    auto a = buildReferenceGraph(g, pruned);
    setenv("SPCGRID_THREADS", "4", 1);
    auto b = buildReferenceGraph(g, pruned);
    unsetenv("SPCGRID_THREADS");
    CHECK(a == b);
  }

  SUBCASE("empty graph has no edges")
  {
    auto e = emptyReferenceGraph({3, 3, 3});
    CHECK(e.edgeCount() == 0);
  }
}
