#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "primitect/pipeline.hpp"
#include "scene_fixture.hpp"

using namespace primitect;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_xyz(const fs::path& path, const PointCloud& pc) {
  std::ofstream out(path);
  out.precision(6);
  for (const Point3& p : pc) {
    out << p.x() << " " << p.y() << " " << p.z() << "\n";
  }
}

const char* kSceneConfig =
    "[raster]\n"
    "cell_size = 0.5\n"
    "[ground]\n"
    "enabled = false\n"
    "[division]\n"
    "d_tilde_max = 0.04\n";

}  // namespace

TEST_CASE("full scene reconstructs a three-unit building") {
  const PointCloud pc = testscene::make_scene();
  const PipelineResult r = run_pipeline(pc, testscene::scene_config());

  REQUIRE(r.buildings.size() == 1);
  CHECK(r.buildings[0].unit_groups.size() == 3);
  CHECK(r.all_converged);

  REQUIRE(r.model.buildings.size() == 1);
  const BuildingModel& b = r.model.buildings[0];
  REQUIRE(b.primitives.size() == 3);
  // Bottom-up: drum, dome, spire.
  CHECK(kind_of(b.primitives[0].params) == PrimitiveKind::Cylinder);
  CHECK(kind_of(b.primitives[1].params) == PrimitiveKind::Hemisphere);
  CHECK(kind_of(b.primitives[2].params) == PrimitiveKind::Cone);

  const auto& drum = std::get<Cylinder>(b.primitives[0].params);
  CHECK(drum.base_radius == doctest::Approx(testscene::kDrumR).epsilon(0.05));
  const auto& dome = std::get<Hemisphere>(b.primitives[1].params);
  CHECK(dome.radius == doctest::Approx(testscene::kDomeR).epsilon(0.1));

  REQUIRE(r.accuracy.rows.size() == 1);
  CHECK(r.accuracy.rows[0].mean_dist < 0.2);
  CHECK(r.storage_ratio < 0.2);
}

TEST_CASE("file driver writes the full artifact set with the config hash") {
  const fs::path dir = fresh_dir("primitect_pipeline_files");
  const fs::path xyz = dir / "scene.xyz";
  const fs::path ini = dir / "run.ini";
  write_xyz(xyz, testscene::make_scene());
  write_file_atomic(ini.string(), kSceneConfig);

  const int code = run_pipeline_files(xyz.string(), ini.string(),
                                      (dir / "out").string(), 0, false, "", false);
  CHECK(code == kExitOk);
  for (const char* f : {"model.txt", "mesh.stl", "report.csv", "summary.txt"}) {
    CHECK(fs::exists(dir / "out" / f));
  }

  const std::string model_text = slurp(dir / "out" / "model.txt");
  PipelineConfig cfg = parse_config(kSceneConfig);
  CHECK(model_text.find("config_hash " + config_hash(cfg)) != std::string::npos);
  const CompactModel m = deserialize_model(model_text);
  REQUIRE(m.buildings.size() == 1);
  CHECK(m.buildings[0].primitives.size() == 3);
}

TEST_CASE("stage flags stop the run early") {
  const fs::path dir = fresh_dir("primitect_pipeline_stage");
  const fs::path xyz = dir / "scene.xyz";
  const fs::path ini = dir / "run.ini";
  write_xyz(xyz, testscene::make_scene());
  write_file_atomic(ini.string(), kSceneConfig);

  CHECK(run_pipeline_files(xyz.string(), ini.string(), (dir / "c").string(), 0,
                           false, "contours", false) == kExitOk);
  CHECK(fs::exists(dir / "c" / "contours.txt"));
  CHECK_FALSE(fs::exists(dir / "c" / "model.txt"));

  CHECK(run_pipeline_files(xyz.string(), ini.string(), (dir / "d").string(), 0,
                           false, "divide", false) == kExitOk);
  CHECK(fs::exists(dir / "d" / "contours.txt"));
  CHECK(fs::exists(dir / "d" / "division.txt"));
  const std::string division = slurp(dir / "d" / "division.txt");
  CHECK(division.find("group") != std::string::npos);
}

TEST_CASE("flat terrain exits with the no-buildings code") {
  const fs::path dir = fresh_dir("primitect_pipeline_flat");
  PointCloud pc;
  for (double x = 0; x <= 30; x += 0.5) {
    for (double y = 0; y <= 30; y += 0.5) pc.emplace_back(x, y, 0.1);
  }
  const fs::path xyz = dir / "flat.xyz";
  write_xyz(xyz, pc);
  CHECK(run_pipeline_files(xyz.string(), "", (dir / "out").string(), 0, false,
                           "", false) == kExitNoBuildings);
}

TEST_CASE("bad inputs map to the documented exit codes") {
  const fs::path dir = fresh_dir("primitect_pipeline_bad");
  const fs::path ini = dir / "bad.ini";
  write_file_atomic(ini.string(), "[raster]\nnot_a_key = 1\n");
  const fs::path xyz = dir / "ok.xyz";
  write_xyz(xyz, testscene::make_scene());

  CHECK(run_pipeline_files(xyz.string(), ini.string(), (dir / "o1").string(), 0,
                           false, "", false) == kExitBadConfig);
  CHECK(run_pipeline_files((dir / "missing.xyz").string(), "",
                           (dir / "o2").string(), 0, false, "", false) ==
        kExitBadInput);
}

TEST_CASE("unknown config keys and sections are rejected") {
  CHECK_THROWS_AS(parse_config("[raster]\ncell = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_config("[nope]\ncell_size = 1\n"), InvalidInput);
  CHECK_THROWS_AS(parse_config("[raster]\ncell_size = abc\n"), InvalidInput);
  // A valid override round-trips through the canonical form.
  const PipelineConfig cfg = parse_config("[raster]\ncell_size = 0.25\n");
  CHECK(cfg.cell_size == doctest::Approx(0.25));
  CHECK(serialize_config(cfg) != serialize_config(PipelineConfig{}));
  CHECK(config_hash(cfg) != config_hash(PipelineConfig{}));
}
