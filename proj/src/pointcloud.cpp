#include "primitect/pointcloud.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace primitect {

PointCloud read_xyz(std::istream& in) {
  PointCloud pc;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z)) {
      throw InvalidInput("malformed xyz line " + std::to_string(lineno));
    }
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
      throw InvalidInput("non-finite coordinate at line " + std::to_string(lineno));
    }
    pc.emplace_back(x, y, z);
  }
  return pc;
}

PointCloud read_xyz_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open point cloud file: " + path);
  return read_xyz(in);
}

void write_xyz(std::ostream& out, const PointCloud& pc) {
  char buf[128];
  for (const Point3& p : pc) {
    std::snprintf(buf, sizeof(buf), "%.4f %.4f %.4f\n", p.x(), p.y(), p.z());
    out << buf;
  }
}

void write_xyz_file(const std::string& path, const PointCloud& pc) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot open output file: " + path);
  write_xyz(out, pc);
}

}  // namespace primitect
