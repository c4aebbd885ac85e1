// spcgrid: command-line front end for the voxel-grid codec.

#include "spc/bdrate.h"
#include "spc/container.h"
#include "spc/error.h"
#include "spc/png.h"
#include "spc/scene.h"
#include "spc/sweep.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <new>

namespace fs = std::filesystem;
using namespace spc;

namespace {

std::vector<uint8_t>
readBytes(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throwData("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void
writeBytes(const std::string& path, std::span<const uint8_t> bytes)
{
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out)
    throwData("cannot write " + path);
}

std::ofstream
openText(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    throwData("cannot write " + path);
  return out;
}

bool
isContainer(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  char magic[4] = {};
  in.read(magic, 4);
  return in && std::equal(magic, magic + 4, "SPCV");
}

// A model is either an .spcv container or a JSON model manifest.
VoxelModel
loadAnyModel(const std::string& path, size_t* sizeBytes)
{
  if (isContainer(path)) {
    auto bytes = readBytes(path);
    *sizeBytes = bytes.size();
    return decompress(bytes);
  }
  VoxelModel m = loadModel(path);
  *sizeBytes = rawModelBytes(m);
  return m;
}

std::string
sibling(const std::string& out, const std::string& suffix)
{
  fs::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix)).string();
}

RdCurve
readCurveCsv(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throwData("cannot open " + path);
  std::string line;
  std::getline(in, line);
  auto header = line;
  int sizeCol = -1, psnrCol = -1, col = 0;
  std::stringstream hs(header);
  for (std::string name; std::getline(hs, name, ','); col++) {
    if (name == "size_bytes")
      sizeCol = col;
    if (name == "psnr_db")
      psnrCol = col;
  }
  if (sizeCol < 0 || psnrCol < 0)
    throwData(path + ": needs size_bytes and psnr_db columns");
  RdCurve curve;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::stringstream ls(line);
    std::vector<std::string> cells;
    for (std::string c; std::getline(ls, c, ',');)
      cells.push_back(c);
    if (int(cells.size()) <= std::max(sizeCol, psnrCol))
      throwData(path + ": short row '" + line + "'");
    try {
      curve.push_back({std::stod(cells[size_t(sizeCol)]), std::stod(cells[size_t(psnrCol)]), 0});
    }
    catch (const std::exception&) {
      throwData(path + ": bad number in row '" + line + "'");
    }
  }
  return curve;
}

struct CompressFlags {
  std::string grid, scene, out;
  double lambda = 1e-4;
  double qstep = 0.5;
  double qfine = 0.125;
  int itersMain = TuneConfig::desk().itersMain;
  int itersPost = TuneConfig::desk().itersPost;
  int rays = TuneConfig::desk().raysPerIter;
  bool noPrediction = false;
  bool noPost = false;

  void add(CLI::App* cmd)
  {
    cmd->add_option("--grid", grid, "Input model manifest (JSON)")->required();
    cmd->add_option("--scene", scene, "Training views (JSON)")->required();
    cmd->add_option("--qstep", qstep, "Coarse quantization step");
    cmd->add_option("--qfine", qfine, "Fine quantization step");
    cmd->add_option("--iters-main", itersMain, "Stage-1 iterations");
    cmd->add_option("--iters-post", itersPost, "Stage-2 iterations");
    cmd->add_option("--rays", rays, "Rays per iteration");
    cmd->add_flag("--no-prediction", noPrediction, "Code quantized values directly");
    cmd->add_flag("--no-post", noPost, "Skip the fine layer and stage 2");
  }

  CompressConfig config(uint64_t seed) const
  {
    CompressConfig cfg;
    cfg.tune.lambda = lambda;
    cfg.tune.itersMain = itersMain;
    cfg.tune.itersPost = itersPost;
    cfg.tune.raysPerIter = rays;
    cfg.tune.seed = seed;
    cfg.quant.qStep = qstep;
    cfg.quant.qFine = qfine;
    cfg.prediction = !noPrediction;
    cfg.postFinetune = !noPost;
    try {
      cfg.quant.validate();
      cfg.tune.validate();
    }
    catch (const Error& e) {
      throwUsage(e.what());
    }
    return cfg;
  }
};

}  // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"Rate-distortion optimised predictive codec for voxel-grid radiance fields"};
  app.require_subcommand(1);
  uint64_t seed = 0;
  app.add_option("--seed", seed, "Seed for every random choice")->capture_default_str();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic model and its training views");
  std::string synthDir;
  SyntheticConfig sc;
  double noise = 0.3;
  synth->add_option("-o,--out-dir", synthDir, "Output directory")->required();
  synth->add_option("--dims", sc.dims, "Grid resolution per axis")->check(CLI::Range(2, 256));
  synth->add_option("--channels", sc.channels, "Feature channels")->check(CLI::Range(1, 64));
  synth->add_option("--cameras", sc.cameras, "Number of views")->check(CLI::Range(1, 1024));
  synth->add_option("--image-size", sc.imageSize, "Image width and height")->check(CLI::Range(1, 4096));
  synth->add_option("--noise", noise, "Feature noise of the input model")->check(CLI::NonNegativeNumber);

  // compress
  auto* comp = app.add_subcommand("compress", "Compress a model into an .spcv container");
  CompressFlags cf;
  cf.add(comp);
  comp->add_option("--lambda", cf.lambda, "Rate weight")->check(CLI::NonNegativeNumber);
  comp->add_option("-o,--out", cf.out, "Output container")->required();

  // decompress
  auto* decomp = app.add_subcommand("decompress", "Decode a container into a model manifest");
  std::string decIn, decOut;
  decomp->add_option("-i,--in", decIn, "Input container")->required();
  decomp->add_option("-o,--out", decOut, "Output model manifest (JSON)")->required();

  // eval
  auto* eval = app.add_subcommand("eval", "Render a model and report PSNR/SSIM/size as CSV");
  std::vector<std::string> evalModels;
  std::string evalScene, evalOut, pngDir;
  eval->add_option("--model", evalModels, "Container or model manifest")->required();
  eval->add_option("--scene", evalScene, "Views with ground-truth images")->required();
  eval->add_option("-o,--out", evalOut, "CSV path (default stdout)");
  eval->add_option("--png-dir", pngDir, "Also write 8-bit renders here");

  // rd-sweep
  auto* sweep = app.add_subcommand("rd-sweep", "Compress at several lambdas and emit the RD curve");
  CompressFlags sf;
  std::string lambdaSpec = "5e-5x2^6", sweepOut, svgOut;
  sf.add(sweep);
  sweep->add_option("--lambdas", lambdaSpec, "base x2^count or comma list")->capture_default_str();
  sweep->add_option("-o,--out", sweepOut, "Curve CSV")->required();
  sweep->add_option("--svg", svgOut, "Optional SVG plot");

  // bd-rate
  auto* bd = app.add_subcommand("bd-rate", "BD-rate of a test curve against an anchor curve");
  std::string anchorPath, testPath;
  bd->add_option("--anchor", anchorPath, "Anchor curve CSV")->required();
  bd->add_option("--test", testPath, "Test curve CSV")->required();

  try {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : int(ErrorKind::kUsage);
  }

  try {
    if (*synth) {
      sc.seed = seed;
      auto syn = makeSyntheticScene(sc);
      fs::create_directories(synthDir);
      fs::path dir(synthDir);
      saveModel(syn.groundTruth, (dir / "gt.json").string());
      saveModel(perturbModel(syn.groundTruth, seed + 1, noise), (dir / "model.json").string());
      saveScene(syn.scene, (dir / "scene.json").string());
      std::printf("wrote %s/{gt,model,scene}.json\n", synthDir.c_str());
    }
    else if (*comp) {
      VoxelModel model = loadModel(cf.grid);
      Scene scene = loadScene(cf.scene);
      auto r = compress(model, scene, cf.config(seed));
      writeBytes(cf.out, r.bytes);

      auto sizes = openText(sibling(cf.out, ".sizes.csv"));
      sizes << "section,bytes\n";
      for (int i = 0; i < kSectionCount; i++)
        sizes << sectionName(SectionId(i)) << "," << r.stats.sectionBytes[size_t(i)] << "\n";
      sizes << "header," << kContainerHeaderBytes << "\n";
      sizes << "total," << r.bytes.size() << "\n";
      auto trace = openText(sibling(cf.out, ".trace.csv"));
      writeTraceCsv(trace, r.trace);

      std::printf(
        "size_bytes=%zu raw_bytes=%zu ratio=%.2f psnr_db=%.12f pruned=%zu critical=%zu\n",
        r.bytes.size(), rawModelBytes(model),
        double(rawModelBytes(model)) / double(r.bytes.size()),
        meanPsnr(r.reconstruction, scene), r.stats.pruned, r.stats.critical);
    }
    else if (*decomp) {
      saveModel(decompress(readBytes(decIn)), decOut);
    }
    else if (*eval) {
      Scene scene = loadScene(evalScene);
      std::ostringstream csv;
      csv << "scene,size_bytes,psnr_db,ssim\n";
      for (const auto& path : evalModels) {
        size_t size = 0;
        VoxelModel m = loadAnyModel(path, &size);
        char buf[256];
        std::snprintf(buf, sizeof buf, "%s,%zu,%.12f,%.12f\n",
                      fs::path(evalScene).stem().string().c_str(), size,
                      meanPsnr(m, scene), meanSsim(m, scene));
        csv << buf;
        if (!pngDir.empty()) {
          fs::create_directories(pngDir);
          for (size_t c = 0; c < scene.cameras.size(); c++) {
            auto name = fs::path(path).stem().string() + "_view" + std::to_string(c) + ".png";
            writePng(renderImage(m, scene.cameras[c], scene.render),
                     (fs::path(pngDir) / name).string());
          }
        }
      }
      if (evalOut.empty())
        std::cout << csv.str();
      else
        openText(evalOut) << csv.str();
    }
    else if (*sweep) {
      auto lambdas = parseLambdas(lambdaSpec);
      VoxelModel model = loadModel(sf.grid);
      Scene scene = loadScene(sf.scene);
      auto points = runSweep(model, scene, sf.config(seed), lambdas);
      RdCurve all = toCurve(points);
      RdCurve hull = paretoHull(all);
      auto out = openText(sweepOut);
      writeCurveCsv(out, all, hull);
      if (!svgOut.empty()) {
        auto svg = openText(svgOut);
        writeCurveSvg(svg, all, hull);
      }
    }
    else if (*bd) {
      std::printf("%.4f\n", bdRate(readCurveCsv(anchorPath), readCurveCsv(testPath)));
    }
  }
  catch (const Error& e) {
    std::fprintf(stderr, "spcgrid: %s\n", e.what());
    return e.exitCode();
  }
  catch (const std::bad_alloc&) {
    std::fprintf(stderr, "spcgrid: out of memory\n");
    return int(ErrorKind::kInternal);
  }
  catch (const std::exception& e) {
    std::fprintf(stderr, "spcgrid: internal error: %s\n", e.what());
    return int(ErrorKind::kInternal);
  }
  return 0;
}
