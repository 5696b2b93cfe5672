#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "afmm/point_set.hpp"

namespace afmm {

/// Point files are CSV with columns x,y,z,sigma; unused axes are written as 0.
/// Values use 17 significant digits so a write/read cycle is exact. The
/// writer adds a `# dim=<d>` line; without it the reader takes the highest
/// axis holding a non-zero coordinate.
void write_points_csv(std::ostream& out, const PointSet& points);
void write_points_csv(const std::filesystem::path& path, const PointSet& points);

PointSet read_points_csv(std::istream& in, std::optional<int> dim = std::nullopt);
PointSet read_points_csv(const std::filesystem::path& path, std::optional<int> dim = std::nullopt);

/// %.17g formatting used by every text output.
std::string format_real(double value);

}  // namespace afmm
