#pragma once

#include <iosfwd>
#include <string>

#include "primitect/types.hpp"

namespace primitect {

/// Reads a plain-text cloud, one "x y z" triple per line. Lines starting
/// with '#' and blank lines are ignored.
PointCloud read_xyz(std::istream& in);
PointCloud read_xyz_file(const std::string& path);

void write_xyz(std::ostream& out, const PointCloud& pc);
void write_xyz_file(const std::string& path, const PointCloud& pc);

}  // namespace primitect
