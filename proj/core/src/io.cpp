#include "afmm/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "afmm/error.hpp"

namespace afmm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_real(std::string_view field, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size())
    throw InputError("line " + std::to_string(line) + ": cannot parse '" + std::string(field) + "' as a number");
  return v;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_points_csv(std::ostream& out, const PointSet& points) {
  out << "# dim=" << points.dim << "\n";
  out << "x,y,z,sigma\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Point& p = points.positions[i];
    out << format_real(p[0]) << ',' << format_real(p[1]) << ',' << format_real(p[2]) << ','
        << format_real(points.intensities[i]) << '\n';
  }
}

void write_points_csv(const std::filesystem::path& path, const PointSet& points) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  write_points_csv(out, points);
  if (!out) throw InputError("failed writing " + path.string());
}

PointSet read_points_csv(std::istream& in, std::optional<int> dim) {
  PointSet points;
  std::optional<int> declared;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      const auto pos = s.find("dim=");
      if (pos != std::string_view::npos) declared = static_cast<int>(parse_real(s.substr(pos + 4), number));
      continue;
    }
    if (s.front() == 'x' || s.front() == 'X') continue;  // header
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const auto comma = s.find(',', start);
      fields.push_back(s.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 4)
      throw InputError("line " + std::to_string(number) + ": expected 4 columns x,y,z,sigma");
    points.push_back({parse_real(fields[0], number), parse_real(fields[1], number), parse_real(fields[2], number)},
                     parse_real(fields[3], number));
  }
  if (dim) {
    points.dim = *dim;
  } else if (declared) {
    points.dim = *declared;
  } else {
    points.dim = 1;
    for (const Point& p : points.positions) {
      if (p[2] != 0.0) points.dim = 3;
      else if (p[1] != 0.0 && points.dim < 2) points.dim = 2;
    }
  }
  if (points.dim < 1 || points.dim > 3) throw InputError("point file dimension must be 1, 2 or 3");
  points.validate();
  return points;
}

PointSet read_points_csv(const std::filesystem::path& path, std::optional<int> dim) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_points_csv(in, dim);
}

}  // namespace afmm
