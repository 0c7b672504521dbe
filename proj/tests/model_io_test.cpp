#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "primitect/model_io.hpp"

using namespace primitect;

namespace {

EDGraph small_graph(int n, double offset = 0.0) {
  EDGraph g;
  for (int i = 0; i < n; ++i) {
    EDNode node;
    node.b = Point3(0.25 * i, 0.5, 1.0 + offset);
    node.t = Point3(offset, 0.0, 0.125 * i);
    g.nodes.push_back(node);
  }
  return g;
}

CompactModel sample_model() {
  CompactModel m;
  m.contour_interval = 0.5;
  m.config_hash = "deadbeef01234567";

  BuildingModel b;
  PosedPrimitive cyl;
  cyl.params = Cylinder{Point3::Zero(), 4.0, 9.0};
  cyl.translation = Point3(10.0, 20.0, 0.25);
  b.primitives.push_back(cyl);
  b.ed_graphs.push_back(small_graph(10));

  PosedPrimitive hemi;
  hemi.params = Hemisphere{Point3(0, 0, 9.0), 4.0};
  hemi.translation = Point3(10.0, 20.0, 0.25);
  b.primitives.push_back(hemi);
  b.ed_graphs.push_back(small_graph(9, 0.5));
  m.buildings.push_back(b);

  BuildingModel b2;
  PosedPrimitive cone;
  cone.params = Cone{Point3::Zero(), 3.0, -2.0 / 3.0, 6.0};
  b2.primitives.push_back(cone);
  b2.ed_graphs.push_back(small_graph(8, 1.0));

  PosedPrimitive poly;
  Polyhedron ph;
  ph.bottom_chain = {{0, 0}, {5, 0}, {5, 3}, {0, 3}};
  ph.top_chain = {{0.5, 0.25}, {4.5, 0.25}, {4.5, 2.75}, {0.5, 2.75}};
  ph.base_z = 0.0;
  ph.top_z = 4.0;
  poly.params = ph;
  b2.primitives.push_back(poly);
  b2.ed_graphs.push_back(small_graph(8, -0.25));
  m.buildings.push_back(b2);
  return m;
}

CompactModel cube_model() {
  CompactModel m;
  BuildingModel b;
  PosedPrimitive p;
  Polyhedron cube;
  cube.bottom_chain = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
  cube.top_chain = cube.bottom_chain;
  cube.base_z = 0.0;
  cube.top_z = 1.0;
  p.params = cube;
  b.primitives.push_back(p);
  b.ed_graphs.push_back(EDGraph{});  // identity: no nodes
  m.buildings.push_back(b);
  return m;
}

}  // namespace

TEST_CASE("serialization is a byte-level fixed point") {
  const CompactModel m = sample_model();
  const std::string once = serialize_model(m);
  const std::string twice = serialize_model(deserialize_model(once));
  CHECK(once == twice);
  CHECK(once.rfind("primitect-model v1\n", 0) == 0);
}

TEST_CASE("round trip preserves values to the stated precision") {
  const CompactModel m = sample_model();
  const CompactModel r = deserialize_model(serialize_model(m));
  REQUIRE(r.buildings.size() == 2);
  CHECK(r.units == "m");
  CHECK(r.contour_interval == doctest::Approx(0.5));
  CHECK(r.config_hash == "deadbeef01234567");

  const auto& cyl = std::get<Cylinder>(r.buildings[0].primitives[0].params);
  CHECK(cyl.base_radius == doctest::Approx(4.0).epsilon(1e-9));
  CHECK((r.buildings[0].primitives[0].translation - Point3(10, 20, 0.25)).norm() <
        1e-4);

  const auto& cone = std::get<Cone>(r.buildings[1].primitives[0].params);
  CHECK(cone.a == doctest::Approx(-2.0 / 3.0).epsilon(2e-4));

  const auto& poly = std::get<Polyhedron>(r.buildings[1].primitives[1].params);
  REQUIRE(poly.bottom_chain.size() == 4);
  CHECK((poly.top_chain[2] - Point2(4.5, 2.75)).norm() < 1e-4);

  REQUIRE(r.buildings[0].ed_graphs[0].nodes.size() == 10);
  for (size_t i = 0; i < 10; ++i) {
    const EDNode& a = m.buildings[0].ed_graphs[0].nodes[i];
    const EDNode& b = r.buildings[0].ed_graphs[0].nodes[i];
    CHECK((a.b - b.b).norm() < 1e-4 * std::sqrt(3.0) + 1e-12);
    CHECK((a.t - b.t).norm() < 1e-4 * std::sqrt(3.0) + 1e-12);
    CHECK((a.A - b.A).norm() < 1e-3);
  }
}

TEST_CASE("a unit cube exports exactly twelve facets") {
  MeshExportStats stats;
  const std::string stl = export_mesh(cube_model(), 8, &stats);
  CHECK(stats.triangles == 12);
  CHECK(stats.degenerate_skipped == 0);

  // Structural checks: header, footer, counts, unit normals.
  CHECK(stl.rfind("solid primitect\n", 0) == 0);
  CHECK(stl.find("endsolid primitect\n") != std::string::npos);
  std::istringstream in(stl);
  std::string word;
  int facets = 0, loops = 0, verts = 0;
  while (in >> word) {
    if (word == "facet") {
      ++facets;
      double nx, ny, nz;
      in >> word >> nx >> ny >> nz;
      REQUIRE(word == "normal");
      CHECK(std::sqrt(nx * nx + ny * ny + nz * nz) ==
            doctest::Approx(1.0).epsilon(1e-5));
      // Cube facet normals are axis-aligned.
      CHECK(std::abs(nx) + std::abs(ny) + std::abs(nz) ==
            doctest::Approx(1.0).epsilon(1e-5));
    } else if (word == "outer") {
      ++loops;
    } else if (word == "vertex") {
      ++verts;
      double x, y, z;
      in >> x >> y >> z;
      CHECK(x >= -1e-6);
      CHECK(x <= 1.0 + 1e-6);
      CHECK(z >= -1e-6);
      CHECK(z <= 1.0 + 1e-6);
    }
  }
  CHECK(facets == 12);
  CHECK(loops == 12);
  CHECK(verts == 36);
}

TEST_CASE("accuracy is monotone in the sampling density") {
  CompactModel m;
  BuildingModel b;
  PosedPrimitive p;
  p.params = Cylinder{Point3::Zero(), 3.0, 6.0};
  b.primitives.push_back(p);
  b.ed_graphs.push_back(EDGraph{});
  m.buildings.push_back(b);

  PointCloud cloud;
  for (double z = 0.3; z < 6.0; z += 0.3) {
    for (int i = 0; i < 60; ++i) {
      const double a = 2.0 * std::numbers::pi * i / 60.0;
      cloud.emplace_back(3.0 * std::cos(a), 3.0 * std::sin(a), z);
    }
  }

  double prev = 1e300;
  for (double density : {10.0, 40.0, 160.0}) {
    const AccuracyReport rep = evaluate_accuracy(m, {cloud}, density, 40);
    REQUIRE(rep.rows.size() == 1);
    CHECK(rep.rows[0].n_points == cloud.size());
    CHECK(rep.rows[0].mean_dist <= prev + 1e-12);
    prev = rep.rows[0].mean_dist;
  }
  CHECK(prev < 0.2);  // dense sampling resolves the exact surface
}

TEST_CASE("finer meshes lower the storage ratio") {
  const CompactModel m = sample_model();
  const double coarse = storage_ratio(m, 12);
  const double fine = storage_ratio(m, 48);
  CHECK(fine < coarse);
  CHECK(fine > 0.0);
}

TEST_CASE("report table lists one row per building") {
  AccuracyReport rep;
  rep.rows.push_back({0, 1200, 0.08, 512, 20000, 512.0 / 20000.0});
  rep.rows.push_back({1, 800, 0.12, 300, 9000, 300.0 / 9000.0});
  const std::string text = format_report(rep);
  std::istringstream in(text);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 3);  // header + 2 rows
  CHECK(text.find("mean_dist_m") != std::string::npos);
  CHECK(text.find("1200") != std::string::npos);
}

TEST_CASE("invalid models are rejected") {
  CompactModel m = sample_model();
  m.buildings[0].ed_graphs.pop_back();
  CHECK_THROWS_AS(serialize_model(m), InvalidInput);

  CompactModel big = cube_model();
  big.buildings[0].ed_graphs[0] = small_graph(2001);
  CHECK_THROWS_AS(serialize_model(big), InvalidInput);

  CHECK_THROWS_AS(deserialize_model("garbage"), InvalidInput);
  CHECK_THROWS_AS(deserialize_model("primitect-model v1\n[meta]\n"), InvalidInput);
}
