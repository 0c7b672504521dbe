#include "primitect/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "primitect/pointcloud.hpp"

namespace primitect {

namespace {

DiscretizedPrimitive world_mesh(const PosedPrimitive& p, int res) {
  DiscretizedPrimitive d = discretize(p.params, res);
  for (Point3& v : d.vertices) v = p.to_world(v);
  return d;
}

EDGraph refined_graph(const PosedPrimitive& prim, const PointCloud& unit_points,
                      const DistanceField& field, const PipelineConfig& cfg,
                      bool& converged) {
  const DiscretizedPrimitive model = world_mesh(prim, cfg.selection.discretize_res);
  const int vertex_count = static_cast<int>(model.vertices.size());
  int node_count = std::min(cfg.ed_node_count, vertex_count / 2);
  if (node_count < 8) {
    converged = true;
    return EDGraph{};  // too small to refine; identity model stands
  }
  EDGraph graph = build_graph(model, node_count, cfg.ed_k);
  const EDSolveResult solved = solve_ed(graph, model, field, cfg.weights, cfg.lm);
  converged = solved.report.converged && !solved.report.stalled;
  return solved.graph;
}

}  // namespace

PipelineResult run_pipeline(const PointCloud& pc, const PipelineConfig& cfg) {
  PointCloud elevated = pc;
  if (cfg.ground_filter) {
    elevated = morphological_ground_filter(pc, cfg.cell_size, cfg.ground_window,
                                           cfg.ground_slope_tol);
  }
  PipelineResult result;
  result.model.contour_interval = cfg.interval;
  result.model.config_hash = config_hash(cfg);
  if (elevated.empty()) return result;

  const RasterDSM dsm = rasterize_dsm(elevated, cfg.cell_size);
  const ContourSet cs = trace_contours(dsm, cfg.interval, cfg.base_elevation);
  if (cs.contours.empty()) return result;
  const NestingForest forest = build_nesting_forest(cs);
  std::vector<BuildingCluster> clusters = extract_buildings(forest, cfg.thresholds);

  std::vector<PointCloud> clouds;
  for (BuildingCluster& cluster : clusters) {
    cluster.points = segment_points(elevated, cluster);
    if (cluster.points.empty() || cluster.contours.size() < 2) continue;

    BuildingResult br;
    BuildingModel bm;
    const PrimitiveDivision division =
        divide_into_primitives(cluster.contours, cfg.division);

    // Unit point slices split midway between neighboring groups' elevations,
    // widened by half an interval each way so a unit keeps the data its
    // surface genuinely covers near the junction.
    std::vector<double> lo(division.groups.size()), hi(division.groups.size());
    for (size_t gi = 0; gi < division.groups.size(); ++gi) {
      double mn = 1e18, mx = -1e18;
      for (int idx : division.groups[gi]) {
        mn = std::min(mn, cluster.contours[idx].elevation);
        mx = std::max(mx, cluster.contours[idx].elevation);
      }
      lo[gi] = mn;
      hi[gi] = mx;
    }
    for (size_t gi = 0; gi < division.groups.size(); ++gi) {
      const double zlo =
          gi == 0 ? -1e18 : 0.5 * (hi[gi - 1] + lo[gi]) - 0.5 * cfg.interval;
      const double zhi = gi + 1 == division.groups.size()
                             ? 1e18
                             : 0.5 * (hi[gi] + lo[gi + 1]) + 0.5 * cfg.interval;
      std::vector<Polygon> unit_contours;
      for (int idx : division.groups[gi]) {
        unit_contours.push_back(cluster.contours[idx]);
      }
      // Clip horizontally to the unit's widest contour (inflated by one cell)
      // so a lower unit's roof does not leak into the unit above it.
      const Polygon* widest = &unit_contours.front();
      for (const Polygon& c : unit_contours) {
        if (polygon_area(c) > polygon_area(*widest)) widest = &c;
      }
      const Point2 center = polygon_centroid(*widest);
      auto in_footprint = [&](const Point2& q) {
        const Point2 d = q - center;
        const double r = d.norm();
        const double shrink = r / (r + cfg.cell_size);
        return point_in_polygon(center + d * shrink, *widest);
      };
      PointCloud unit_points;
      for (const Point3& p : cluster.points) {
        if (p.z() >= zlo && p.z() < zhi && in_footprint(p.head<2>())) {
          unit_points.push_back(p);
        }
      }
      if (unit_points.size() < 10) continue;

      const DistanceField field =
          build_distance_field(unit_points, cfg.field_voxel, cfg.field_pad);
      const FitResult fit =
          select_primitive(unit_points, unit_contours, field, cfg.selection);
      bool ed_converged = true;
      EDGraph graph = refined_graph(fit.primitive, unit_points, field, cfg,
                                    ed_converged);
      br.all_converged = br.all_converged && fit.converged && ed_converged;
      br.unit_groups.push_back(division.groups[gi]);
      bm.primitives.push_back(fit.primitive);
      bm.ed_graphs.push_back(std::move(graph));
    }
    if (bm.primitives.empty()) continue;
    br.cluster = cluster;
    result.all_converged = result.all_converged && br.all_converged;
    clouds.push_back(br.cluster.points);
    result.buildings.push_back(std::move(br));
    result.model.buildings.push_back(std::move(bm));
  }
  if (result.model.buildings.empty()) return result;

  result.accuracy =
      evaluate_accuracy(result.model, clouds, cfg.sample_density, cfg.mesh_res);
  result.storage_ratio = storage_ratio(result.model, cfg.mesh_res);
  return result;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

namespace {

std::string dump_contours(const ContourSet& cs) {
  std::ostringstream out;
  char buf[128];
  for (const Polygon& c : cs.contours) {
    std::snprintf(buf, sizeof(buf), "contour %.4f %zu\n", c.elevation,
                  c.vertices.size());
    out << buf;
    for (const Point2& v : c.vertices) {
      std::snprintf(buf, sizeof(buf), "%.4f %.4f\n", v.x(), v.y());
      out << buf;
    }
  }
  return out.str();
}

}  // namespace

int run_pipeline_files(const std::string& input_path,
                       const std::string& config_path,
                       const std::string& out_dir, unsigned seed_override,
                       bool has_seed_override, const std::string& stage,
                       bool verbose) {
  PipelineConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  }
  if (has_seed_override) cfg.seed = seed_override;

  PointCloud pc;
  try {
    pc = read_xyz_file(input_path);
    if (pc.empty()) throw InvalidInput("empty point cloud");
  } catch (const std::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitBadInput;
  }

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  try {
    if (stage == "contours" || stage == "divide") {
      PointCloud elevated = cfg.ground_filter
                                ? morphological_ground_filter(
                                      pc, cfg.cell_size, cfg.ground_window,
                                      cfg.ground_slope_tol)
                                : pc;
      const RasterDSM dsm = rasterize_dsm(elevated, cfg.cell_size);
      const ContourSet cs = trace_contours(dsm, cfg.interval, cfg.base_elevation);
      write_file_atomic(out_dir + "/contours.txt", dump_contours(cs));
      if (stage == "divide") {
        const NestingForest forest = build_nesting_forest(cs);
        const auto clusters = extract_buildings(forest, cfg.thresholds);
        std::ostringstream out;
        for (size_t bi = 0; bi < clusters.size(); ++bi) {
          if (clusters[bi].contours.size() < 2) continue;
          const PrimitiveDivision division =
              divide_into_primitives(clusters[bi].contours, cfg.division);
          out << "building " << bi << " groups " << division.groups.size()
              << "\n";
          for (const auto& g : division.groups) {
            out << " ";
            for (int idx : g) out << " " << idx;
            out << "\n";
          }
        }
        write_file_atomic(out_dir + "/division.txt", out.str());
      }
      return kExitOk;
    }

    const PipelineResult result = run_pipeline(pc, cfg);
    if (result.model.buildings.empty()) {
      std::cerr << "no buildings found\n";
      return kExitNoBuildings;
    }
    write_file_atomic(out_dir + "/model.txt", serialize_model(result.model));
    MeshExportStats stats;
    write_file_atomic(out_dir + "/mesh.stl",
                      export_mesh(result.model, cfg.mesh_res, &stats));
    write_file_atomic(out_dir + "/report.csv", format_report(result.accuracy));
    std::ostringstream summary;
    summary << "config_hash " << result.model.config_hash << "\n";
    summary << "buildings " << result.model.buildings.size() << "\n";
    for (size_t bi = 0; bi < result.model.buildings.size(); ++bi) {
      summary << "building " << bi << " primitives";
      for (const PosedPrimitive& p : result.model.buildings[bi].primitives) {
        summary << " " << kind_name(kind_of(p.params));
      }
      summary << "\n";
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", result.storage_ratio);
    summary << "storage_ratio " << buf << "\n";
    summary << "triangles " << stats.triangles << "\n";
    summary << "degenerate_skipped " << stats.degenerate_skipped << "\n";
    summary << "converged " << (result.all_converged ? "true" : "false") << "\n";
    write_file_atomic(out_dir + "/summary.txt", summary.str());
    if (verbose) std::cerr << summary.str();
    return result.all_converged ? kExitOk : kExitNonConverged;
  } catch (const std::exception& e) {
    std::cerr << "pipeline error: " << e.what() << "\n";
    return kExitBadInput;
  }
}

CompactModel fixture_model(int which, unsigned seed) {
  CompactModel m;
  BuildingModel b;
  auto add = [&](const PrimitiveParams& params, const Point3& translation,
                 int node_count) {
    PosedPrimitive p;
    p.params = params;
    p.translation = translation;
    const DiscretizedPrimitive mesh = world_mesh(p, 24);
    node_count = std::min(node_count, static_cast<int>(mesh.vertices.size()) / 2);
    b.primitives.push_back(p);
    b.ed_graphs.push_back(build_graph(mesh, node_count, 4));
  };
  switch (which % 3) {
    case 0:  // dome on drum
      add(Cylinder{Point3::Zero(), 6.0, 12.0}, Point3::Zero(), 60);
      add(Hemisphere{Point3::Zero(), 6.0}, Point3(0, 0, 12), 60);
      break;
    case 1:  // drum under a conic spire
      add(Cylinder{Point3::Zero(), 5.0, 10.0}, Point3::Zero(), 60);
      add(Cone{Point3::Zero(), 5.0, -8.0 / 25.0, 8.0}, Point3(0, 0, 10), 60);
      break;
    default: {  // 16-gon tower bent sideways by its graph
      Polyhedron poly;
      for (int i = 0; i < 16; ++i) {
        const double a = 2.0 * 3.14159265358979323846 * i / 16;
        poly.bottom_chain.emplace_back(4.0 * std::cos(a), 4.0 * std::sin(a));
      }
      poly.top_chain = poly.bottom_chain;
      poly.base_z = 0.0;
      poly.top_z = 20.0;
      add(poly, Point3::Zero(), 30);
      for (EDNode& node : b.ed_graphs.back().nodes) {
        node.t.x() = 0.003 * node.b.z() * node.b.z();
      }
      break;
    }
  }
  (void)seed;
  m.buildings.push_back(std::move(b));
  return m;
}

int run_benchmark_files(const std::string& config_path,
                        const std::string& out_dir, int trials_override,
                        bool verbose) {
  PipelineConfig cfg;
  try {
    if (!config_path.empty()) cfg = parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitBadConfig;
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);

  TrialConfig tc;
  tc.seed = cfg.seed;
  tc.trials = trials_override > 0 ? trials_override : cfg.bench_trials;
  tc.sigma_scale = cfg.bench_sigma_scale;
  tc.division = cfg.division;
  const MonteCarloGrid grid = run_monte_carlo(
      tc, {1.0, 2.0, 3.0, 4.0, 5.0},
      {DeformationLevel::Small, DeformationLevel::Medium,
       DeformationLevel::Heavy});
  write_file_atomic(out_dir + "/grid.csv", format_grid(grid));
  if (verbose) std::cerr << format_grid(grid);

  std::ostringstream storage;
  storage << "id,compact_bytes,mesh_bytes,ratio\n";
  AccuracyReport accuracy;
  for (int which = 0; which < 3; ++which) {
    const CompactModel fixture = fixture_model(which, cfg.seed + which);
    const size_t compact = serialize_model(fixture).size();
    const size_t mesh = export_mesh(fixture, cfg.mesh_res).size();
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%d,%zu,%zu,%.4f\n", which, compact, mesh,
                  static_cast<double>(compact) / mesh);
    storage << buf;

    const PointCloud cloud = sample_model_surface(fixture, 4.0, 24);
    AccuracyReport one =
        evaluate_accuracy(fixture, {cloud}, cfg.sample_density, cfg.mesh_res);
    one.rows[0].id = which;
    accuracy.rows.push_back(one.rows[0]);
  }
  write_file_atomic(out_dir + "/storage.csv", storage.str());
  write_file_atomic(out_dir + "/accuracy.csv", format_report(accuracy));
  return kExitOk;
}

}  // namespace primitect
