#include "spc/container.h"
#include "spc/error.h"
#include "spc/half.h"

#include <doctest.h>

#include <random>

using namespace spc;

namespace {

struct Small {
  SyntheticScene syn;
  VoxelModel model;
  CompressConfig cfg;
};

const Small&
small()
{
  static const Small s = [] {
    Small out;
    SyntheticConfig sc;
    sc.seed = 21;
    sc.dims = 8;
    sc.channels = 3;
    sc.cameras = 3;
    sc.imageSize = 8;
    sc.net.hidden = 16;
    out.syn = makeSyntheticScene(sc);
    out.model = perturbModel(out.syn.groundTruth, 22, 0.3);
    out.cfg.tune.itersMain = 20;
    out.cfg.tune.itersPost = 10;
    out.cfg.tune.raysPerIter = 64;
    out.cfg.tune.seed = 4;
    return out;
  }();
  return s;
}

const CompressResult&
smallResult()
{
  static const CompressResult r = compress(small().model, small().syn.scene, small().cfg);
  return r;
}

bool
sameModel(const VoxelModel& a, const VoxelModel& b)
{
  auto eq = [](std::span<const double> x, std::span<const double> y) {
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin());
  };
  return a.dims() == b.dims() && a.densityShift == b.densityShift
         && eq(a.density.values(), b.density.values())
         && eq(a.features.values(), b.features.values())
         && eq(a.net.params(), b.net.params());
}

void
expectDataError(std::span<const uint8_t> bytes)
{
  try {
    decompress(bytes);
    FAIL("corrupt container decoded");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
  }
}

}  // namespace

TEST_CASE("framing: size is the payloads plus a fixed header")
{
  SectionPayloads s;
  s[0] = {1, 2, 3};
  s[4] = std::vector<uint8_t>(1000, 7);
  auto bytes = frameContainer(s);
  CHECK(kContainerHeaderBytes == 174);
  CHECK(bytes.size() == 1003 + kContainerHeaderBytes);
  CHECK(parseContainer(bytes) == s);

  SectionPayloads empty;
  CHECK(frameContainer(empty).size() == kContainerHeaderBytes);
  CHECK(parseContainer(frameContainer(empty)) == empty);
}

TEST_CASE("framing: header damage is reported")
{
  SectionPayloads s;
  s[2] = {9, 9};
  auto good = frameContainer(s);

  auto bad = good;
  bad[0] = 'X';
  CHECK_THROWS_WITH_AS(parseContainer(bad), doctest::Contains("magic"), Error);
  bad = good;
  bad[4] = 2;
  CHECK_THROWS_WITH_AS(parseContainer(bad), doctest::Contains("version"), Error);
  bad = good;
  bad[6] = 9;  // first entry id
  CHECK_THROWS_WITH_AS(parseContainer(bad), doctest::Contains("unknown section"), Error);
  bad = good;
  bad[6 + kSectionEntryBytes] = 0;  // duplicate id 0
  CHECK_THROWS_AS(parseContainer(bad), Error);
  bad = good;
  bad.push_back(0);
  CHECK_THROWS_WITH_AS(parseContainer(bad), doctest::Contains("trailing"), Error);
  bad = good;
  bad.back() ^= 1;
  CHECK_THROWS_WITH_AS(parseContainer(bad), doctest::Contains("crc"), Error);
}

TEST_CASE("mask packing")
{
  Dims d{5, 3, 2};
  VoxelMask m(d);
  std::mt19937_64 rng(1);
  for (size_t v = 0; v < d.count(); v++)
    m.set(v, rng() & 1);
  auto packed = packMask(m);
  CHECK(packed.size() == (d.count() + 7) / 8);
  CHECK(unpackMask(packed, d) == m);

  VoxelMask first(d);
  first.set(0, true);
  CHECK(packMask(first)[0] == 0x80);

  auto padded = packed;
  padded.back() |= 1;  // 30 voxels leave two padding bits
  CHECK_THROWS_AS(unpackMask(padded, d), Error);
  packed.pop_back();
  CHECK_THROWS_AS(unpackMask(packed, d), Error);
}

TEST_CASE("compress: section report and raw size accounting")
{
  const auto& r = smallResult();
  size_t sum = 0;
  for (size_t b : r.stats.sectionBytes)
    sum += b;
  CHECK(r.bytes.size() == sum + kContainerHeaderBytes);
  const auto& m = small().model;
  CHECK(rawModelBytes(m)
        == 4 * (m.density.values().size() + m.features.values().size() + m.net.paramCount()));
  CHECK(r.stats.voxels == 512);
  CHECK(r.stats.sectionBytes[size_t(SectionId::kFineResiduals)] > 0);
  CHECK(r.stats.sectionBytes[size_t(SectionId::kReferenceIndexes)] > 0);
}

TEST_CASE("decompress reproduces the encoder reconstruction exactly")
{
  const auto& r = smallResult();
  VoxelModel dec = decompress(r.bytes);
  CHECK(sameModel(dec, r.reconstruction));
  for (const auto& cam : small().syn.scene.cameras) {
    Image a = renderImage(dec, cam, small().syn.scene.render);
    Image b = renderImage(r.reconstruction, cam, small().syn.scene.render);
    CHECK(a.rgb == b.rgb);
  }
  // net and density are stored at half precision
  for (double p : dec.net.params())
    CHECK(roundToHalf(p) == p);
  for (double p : dec.density.values())
    CHECK(roundToHalf(p) == p);
}

TEST_CASE("compress is deterministic")
{
  auto again = compress(small().model, small().syn.scene, small().cfg);
  CHECK(again.bytes == smallResult().bytes);
}

TEST_CASE("ablation switches change the container layout")
{
  auto cfg = small().cfg;
  cfg.postFinetune = false;
  cfg.prediction = false;
  auto r = compress(small().model, small().syn.scene, cfg);
  CHECK(r.stats.sectionBytes[size_t(SectionId::kFineResiduals)] == 0);
  CHECK(r.stats.sectionBytes[size_t(SectionId::kReferenceIndexes)] == 0);
  CHECK(sameModel(decompress(r.bytes), r.reconstruction));

  // a fine section in a container that declares none is rejected
  auto sections = parseContainer(r.bytes);
  sections[size_t(SectionId::kFineResiduals)] = {0};
  expectDataError(frameContainer(sections));
}

TEST_CASE("every single-bit flip is detected")
{
  const auto& bytes = smallResult().bytes;
  size_t crcFailures = 0;
  for (size_t i = 0; i < bytes.size(); i++) {
    for (int bit = 0; bit < 8; bit++) {
      auto b = bytes;
      b[i] ^= uint8_t(1u << bit);
      try {
        decompress(b);
        FAIL("bit flip at byte " << i << " decoded");
      } catch (const Error& e) {
        REQUIRE(e.kind() == ErrorKind::kData);
        if (i >= kContainerHeaderBytes) {
          REQUIRE(std::string(e.what()).find("crc") != std::string::npos);
          crcFailures++;
        }
      }
    }
  }
  CHECK(crcFailures == 8 * (bytes.size() - kContainerHeaderBytes));
}

TEST_CASE("every truncation is a framing error")
{
  const auto& bytes = smallResult().bytes;
  for (size_t n = 0; n < bytes.size(); n++)
    expectDataError(std::span<const uint8_t>(bytes.data(), n));
}

TEST_CASE("valid framing around bad payloads still fails cleanly")
{
  auto sections = parseContainer(smallResult().bytes);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 300; t++) {
    auto s = sections;
    auto& sec = s[size_t(rng() % kSectionCount)];
    if (sec.empty() || t % 3 == 0)
      sec.push_back(uint8_t(rng()));
    else
      sec[rng() % sec.size()] ^= uint8_t(1u << (rng() % 8));
    try {
      decompress(frameContainer(s));
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::kData);
    }
  }
}
