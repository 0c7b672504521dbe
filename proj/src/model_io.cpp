#include "primitect/model_io.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "primitect/kdtree.hpp"

namespace primitect {

namespace {

constexpr int kMaxGraphNodes = 2000;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

void write_primitive(std::ostream& out, const PosedPrimitive& p) {
  out << "type " << kind_name(kind_of(p.params)) << "\n";
  std::visit(
      [&](const auto& prim) {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Hemisphere>) {
          out << "center " << fmt(prim.center.x()) << " " << fmt(prim.center.y())
              << " " << fmt(prim.center.z()) << "\n";
          out << "radius " << fmt(prim.radius) << "\n";
        } else if constexpr (std::is_same_v<T, Cone>) {
          out << "base_center " << fmt(prim.base_center.x()) << " "
              << fmt(prim.base_center.y()) << " " << fmt(prim.base_center.z()) << "\n";
          out << "base_radius " << fmt(prim.base_radius) << "\n";
          out << "a " << fmt(prim.a) << "\n";
          out << "b " << fmt(prim.b) << "\n";
        } else if constexpr (std::is_same_v<T, Cylinder>) {
          out << "base_center " << fmt(prim.base_center.x()) << " "
              << fmt(prim.base_center.y()) << " " << fmt(prim.base_center.z()) << "\n";
          out << "base_radius " << fmt(prim.base_radius) << "\n";
          out << "height " << fmt(prim.height) << "\n";
        } else {
          out << "base_z " << fmt(prim.base_z) << "\n";
          out << "top_z " << fmt(prim.top_z) << "\n";
          out << "corners " << prim.bottom_chain.size() << "\n";
          for (const Point2& c : prim.bottom_chain) {
            out << "bottom " << fmt(c.x()) << " " << fmt(c.y()) << "\n";
          }
          for (const Point2& c : prim.top_chain) {
            out << "top " << fmt(c.x()) << " " << fmt(c.y()) << "\n";
          }
        }
      },
      p.params);
  out << "rotation";
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) out << " " << fmt(p.rotation(r, c));
  }
  out << "\n";
  out << "translation " << fmt(p.translation.x()) << " " << fmt(p.translation.y())
      << " " << fmt(p.translation.z()) << "\n";
}

}  // namespace

std::string serialize_model(const CompactModel& m) {
  std::ostringstream out;
  out << "primitect-model v1\n";
  out << "[meta]\n";
  out << "units " << m.units << "\n";
  out << "interval " << fmt(m.contour_interval) << "\n";
  out << "config_hash " << m.config_hash << "\n";
  out << "buildings " << m.buildings.size() << "\n";
  for (size_t bi = 0; bi < m.buildings.size(); ++bi) {
    const BuildingModel& b = m.buildings[bi];
    if (b.primitives.size() != b.ed_graphs.size()) {
      throw InvalidInput("every primitive needs exactly one ED graph");
    }
    out << "[building " << bi << "]\n";
    out << "primitives " << b.primitives.size() << "\n";
    for (size_t pi = 0; pi < b.primitives.size(); ++pi) {
      out << "[primitive " << pi << "]\n";
      write_primitive(out, b.primitives[pi]);
      const EDGraph& g = b.ed_graphs[pi];
      if (static_cast<int>(g.nodes.size()) > kMaxGraphNodes) {
        throw InvalidInput("ED graph exceeds the 2000-node budget");
      }
      out << "[edgraph " << pi << "]\n";
      out << "k " << g.k << "\n";
      out << "nodes " << g.nodes.size() << "\n";
      for (const EDNode& n : g.nodes) {
        out << fmt(n.b.x()) << " " << fmt(n.b.y()) << " " << fmt(n.b.z());
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) out << " " << fmt(n.A(r, c));
        }
        out << " " << fmt(n.t.x()) << " " << fmt(n.t.y()) << " " << fmt(n.t.z());
        out << "\n";
      }
    }
  }
  return out.str();
}

namespace {

struct Parser {
  std::istringstream in;
  std::string line;

  explicit Parser(const std::string& text) : in(text) {}

  std::string next() {
    if (!std::getline(in, line)) throw InvalidInput("model file truncated");
    return line;
  }
  std::string expect_key(const std::string& key) {
    const std::string l = next();
    if (l.rfind(key + " ", 0) != 0) {
      throw InvalidInput("model file: expected '" + key + "', got '" + l + "'");
    }
    return l.substr(key.size() + 1);
  }
  void expect(const std::string& exact) {
    if (next() != exact) {
      throw InvalidInput("model file: expected '" + exact + "', got '" + line + "'");
    }
  }
};

std::vector<double> parse_doubles(const std::string& s, size_t n) {
  std::istringstream ls(s);
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    if (!(ls >> out[i])) throw InvalidInput("model file: bad numeric field");
  }
  return out;
}

}  // namespace

CompactModel deserialize_model(const std::string& text) {
  Parser p(text);
  p.expect("primitect-model v1");
  p.expect("[meta]");
  CompactModel m;
  m.units = p.expect_key("units");
  m.contour_interval = parse_doubles(p.expect_key("interval"), 1)[0];
  m.config_hash = p.expect_key("config_hash");
  const size_t nb = static_cast<size_t>(std::stoul(p.expect_key("buildings")));
  for (size_t bi = 0; bi < nb; ++bi) {
    p.expect("[building " + std::to_string(bi) + "]");
    BuildingModel b;
    const size_t np = static_cast<size_t>(std::stoul(p.expect_key("primitives")));
    for (size_t pi = 0; pi < np; ++pi) {
      p.expect("[primitive " + std::to_string(pi) + "]");
      const std::string type = p.expect_key("type");
      PosedPrimitive prim;
      if (type == "hemisphere") {
        Hemisphere h;
        const auto c = parse_doubles(p.expect_key("center"), 3);
        h.center = Point3(c[0], c[1], c[2]);
        h.radius = parse_doubles(p.expect_key("radius"), 1)[0];
        prim.params = h;
      } else if (type == "cone") {
        Cone c;
        const auto bc = parse_doubles(p.expect_key("base_center"), 3);
        c.base_center = Point3(bc[0], bc[1], bc[2]);
        c.base_radius = parse_doubles(p.expect_key("base_radius"), 1)[0];
        c.a = parse_doubles(p.expect_key("a"), 1)[0];
        c.b = parse_doubles(p.expect_key("b"), 1)[0];
        prim.params = c;
      } else if (type == "cylinder") {
        Cylinder c;
        const auto bc = parse_doubles(p.expect_key("base_center"), 3);
        c.base_center = Point3(bc[0], bc[1], bc[2]);
        c.base_radius = parse_doubles(p.expect_key("base_radius"), 1)[0];
        c.height = parse_doubles(p.expect_key("height"), 1)[0];
        prim.params = c;
      } else if (type == "polyhedron") {
        Polyhedron poly;
        poly.base_z = parse_doubles(p.expect_key("base_z"), 1)[0];
        poly.top_z = parse_doubles(p.expect_key("top_z"), 1)[0];
        const size_t nc = static_cast<size_t>(std::stoul(p.expect_key("corners")));
        for (size_t i = 0; i < nc; ++i) {
          const auto xy = parse_doubles(p.expect_key("bottom"), 2);
          poly.bottom_chain.emplace_back(xy[0], xy[1]);
        }
        for (size_t i = 0; i < nc; ++i) {
          const auto xy = parse_doubles(p.expect_key("top"), 2);
          poly.top_chain.emplace_back(xy[0], xy[1]);
        }
        prim.params = poly;
      } else {
        throw InvalidInput("model file: unknown primitive type " + type);
      }
      const auto rot = parse_doubles(p.expect_key("rotation"), 9);
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) prim.rotation(r, c) = rot[3 * r + c];
      }
      const auto tr = parse_doubles(p.expect_key("translation"), 3);
      prim.translation = Point3(tr[0], tr[1], tr[2]);
      b.primitives.push_back(std::move(prim));

      p.expect("[edgraph " + std::to_string(pi) + "]");
      EDGraph g;
      g.k = static_cast<int>(std::stoi(p.expect_key("k")));
      const size_t nn = static_cast<size_t>(std::stoul(p.expect_key("nodes")));
      for (size_t i = 0; i < nn; ++i) {
        const auto vals = parse_doubles(p.next(), 15);
        EDNode node;
        node.b = Point3(vals[0], vals[1], vals[2]);
        for (int r = 0; r < 3; ++r) {
          for (int c = 0; c < 3; ++c) node.A(r, c) = vals[3 + 3 * r + c];
        }
        node.t = Point3(vals[12], vals[13], vals[14]);
        g.nodes.push_back(node);
      }
      b.ed_graphs.push_back(std::move(g));
    }
    m.buildings.push_back(std::move(b));
  }
  return m;
}

namespace {

struct WarpedMesh {
  std::vector<Point3> vertices;
  const std::vector<std::array<int, 3>>* faces;
};

WarpedMesh warped_mesh(const PosedPrimitive& prim, const EDGraph& graph, int res,
                       DiscretizedPrimitive& storage) {
  storage = discretize(prim.params, res);
  WarpedMesh out;
  out.faces = &storage.faces;
  out.vertices.reserve(storage.vertices.size());
  std::vector<Point3> world;
  world.reserve(storage.vertices.size());
  for (const Point3& v : storage.vertices) world.push_back(prim.to_world(v));
  if (graph.nodes.empty()) {
    out.vertices = std::move(world);
    return out;
  }
  EDGraph g = graph;
  bind_graph(g, world);
  for (size_t i = 0; i < world.size(); ++i) {
    out.vertices.push_back(warp_vertex(g, static_cast<int>(i), world[i]));
  }
  return out;
}

}  // namespace

std::string export_mesh(const CompactModel& m, int res, MeshExportStats* stats) {
  std::ostringstream out;
  out << "solid primitect\n";
  MeshExportStats local;
  char buf[256];
  for (const BuildingModel& b : m.buildings) {
    for (size_t pi = 0; pi < b.primitives.size(); ++pi) {
      DiscretizedPrimitive storage;
      const WarpedMesh mesh = warped_mesh(b.primitives[pi], b.ed_graphs[pi], res, storage);
      for (const auto& face : *mesh.faces) {
        const Point3& a = mesh.vertices[face[0]];
        const Point3& c = mesh.vertices[face[1]];
        const Point3& d = mesh.vertices[face[2]];
        Point3 n = (c - a).cross(d - a);
        const double len = n.norm();
        if (len < 1e-12) {
          ++local.degenerate_skipped;
          continue;
        }
        n /= len;
        std::snprintf(buf, sizeof(buf), "facet normal %.6f %.6f %.6f\n",
                      n.x(), n.y(), n.z());
        out << buf << " outer loop\n";
        for (const Point3* v : {&a, &c, &d}) {
          std::snprintf(buf, sizeof(buf), "  vertex %.4f %.4f %.4f\n",
                        v->x(), v->y(), v->z());
          out << buf;
        }
        out << " endloop\nendfacet\n";
        ++local.triangles;
      }
    }
  }
  out << "endsolid primitect\n";
  if (stats) *stats = local;
  return out.str();
}

namespace {

// Radical-inverse sequence; prefixes nest, so denser sampling only adds
// points.
double radical_inverse(unsigned base, unsigned i) {
  double f = 1.0, r = 0.0;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace

PointCloud sample_model_surface(const CompactModel& m, double density, int res) {
  PointCloud samples;
  for (const BuildingModel& b : m.buildings) {
    for (size_t pi = 0; pi < b.primitives.size(); ++pi) {
      DiscretizedPrimitive storage;
      const WarpedMesh mesh = warped_mesh(b.primitives[pi], b.ed_graphs[pi], res, storage);
      for (const Point3& v : mesh.vertices) samples.push_back(v);
      for (const auto& face : *mesh.faces) {
        const Point3& a = mesh.vertices[face[0]];
        const Point3& c = mesh.vertices[face[1]];
        const Point3& d = mesh.vertices[face[2]];
        const double area = 0.5 * (c - a).cross(d - a).norm();
        const int count = static_cast<int>(std::ceil(area * density));
        for (int i = 0; i < count; ++i) {
          double u = radical_inverse(2, static_cast<unsigned>(i));
          double v = radical_inverse(3, static_cast<unsigned>(i));
          if (u + v > 1.0) {
            u = 1.0 - u;
            v = 1.0 - v;
          }
          samples.push_back(a + u * (c - a) + v * (d - a));
        }
      }
    }
  }
  return samples;
}

AccuracyReport evaluate_accuracy(const CompactModel& m,
                                 const std::vector<PointCloud>& clouds,
                                 double density, int mesh_res) {
  if (clouds.size() != m.buildings.size()) {
    throw InvalidInput("evaluate_accuracy: one cloud per building required");
  }
  AccuracyReport report;
  for (size_t bi = 0; bi < m.buildings.size(); ++bi) {
    if (clouds[bi].empty()) throw InvalidInput("evaluate_accuracy: empty cloud");
    CompactModel sub;
    sub.units = m.units;
    sub.contour_interval = m.contour_interval;
    sub.config_hash = m.config_hash;
    sub.buildings.push_back(m.buildings[bi]);

    const PointCloud samples = sample_model_surface(sub, density, mesh_res);
    const KdTree3 tree(samples);
    double acc = 0.0;
    for (const Point3& p : clouds[bi]) acc += tree.nearest_distance(p);

    BuildingAccuracy row;
    row.id = static_cast<int>(bi);
    row.n_points = clouds[bi].size();
    row.mean_dist = acc / clouds[bi].size();
    row.compact_bytes = serialize_model(sub).size();
    row.mesh_bytes = export_mesh(sub, mesh_res).size();
    row.ratio = static_cast<double>(row.compact_bytes) / row.mesh_bytes;
    report.rows.push_back(row);
  }
  return report;
}

double storage_ratio(const CompactModel& m, int res) {
  const size_t compact = serialize_model(m).size();
  const size_t mesh = export_mesh(m, res).size();
  return static_cast<double>(compact) / static_cast<double>(mesh);
}

std::string format_report(const AccuracyReport& report) {
  std::ostringstream out;
  out << "id,n_points,mean_dist_m,compact_bytes,mesh_bytes,ratio\n";
  char buf[160];
  for (const BuildingAccuracy& r : report.rows) {
    std::snprintf(buf, sizeof(buf), "%d,%zu,%.4f,%zu,%zu,%.4f\n", r.id,
                  r.n_points, r.mean_dist, r.compact_bytes, r.mesh_bytes, r.ratio);
    out << buf;
  }
  return out.str();
}

}  // namespace primitect
