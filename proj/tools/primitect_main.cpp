#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "primitect/kdtree.hpp"
#include "primitect/pipeline.hpp"
#include "primitect/pointcloud.hpp"

using namespace primitect;

int main(int argc, char** argv) {
  CLI::App app{"Curved-building reconstruction from XYZ point clouds"};
  app.require_subcommand(1);

  std::string input, config, out_dir = ".", stage;
  unsigned seed = 0;
  bool has_seed = false;
  int trials = 0;
  bool verbose = false;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input) {
      cmd->add_option("--input", input, "XYZ point cloud file")->required();
    }
    cmd->add_option("--config", config, "pipeline config file");
    cmd->add_option("--out-dir", out_dir, "output directory");
    cmd->add_option("--seed", seed, "random seed override")
        ->each([&](const std::string&) { has_seed = true; });
    cmd->add_flag("--verbose", verbose, "log progress to stderr");
  };

  CLI::App* reconstruct = app.add_subcommand(
      "reconstruct", "full pipeline: model, mesh and reports");
  add_common(reconstruct, true);
  reconstruct->add_option("--stage", stage,
                          "stop early: contours or divide");

  CLI::App* contour =
      app.add_subcommand("contour", "debug dump of traced contours");
  add_common(contour, true);

  CLI::App* benchmark = app.add_subcommand(
      "benchmark", "Monte Carlo division study plus storage/accuracy tables");
  add_common(benchmark, false);
  benchmark->add_option("--trials", trials, "trials per grid cell");

  std::string model_path;
  double density = 100.0;
  CLI::App* evaluate =
      app.add_subcommand("evaluate", "mean cloud-to-model distance");
  add_common(evaluate, true);
  evaluate->add_option("--model", model_path, "compact model file")->required();
  evaluate->add_option("--density", density, "surface samples per m^2");

  CLI11_PARSE(app, argc, argv);

  if (reconstruct->parsed()) {
    return run_pipeline_files(input, config, out_dir, seed, has_seed, stage,
                              verbose);
  }
  if (contour->parsed()) {
    return run_pipeline_files(input, config, out_dir, seed, has_seed,
                              "contours", verbose);
  }
  if (benchmark->parsed()) {
    return run_benchmark_files(config, out_dir, trials, verbose);
  }

  // evaluate
  try {
    std::ifstream in(model_path, std::ios::binary);
    if (!in) throw InvalidInput("cannot read model file " + model_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    const CompactModel model = deserialize_model(buf.str());
    const PointCloud cloud = read_xyz_file(input);
    if (cloud.empty()) throw InvalidInput("empty point cloud");
    const PointCloud samples = sample_model_surface(model, density, 40);
    const KdTree3 tree(samples);
    double acc = 0.0;
    for (const Point3& p : cloud) acc += tree.nearest_distance(p);
    std::printf("n_points,mean_dist_m\n%zu,%.4f\n", cloud.size(),
                acc / cloud.size());
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "evaluate error: " << e.what() << "\n";
    return kExitBadInput;
  }
}
