#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace afmm {

/// Coordinates are always stored in 3 components; unused axes are zero for dim < 3.
using Point = std::array<double, 3>;

struct PointSet {
  int dim = 3;
  std::vector<Point> positions;
  std::vector<double> intensities;

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }

  void push_back(const Point& p, double sigma) {
    positions.push_back(p);
    intensities.push_back(sigma);
  }

  /// Throws InputError unless every used coordinate lies in [0,1], unused axes
  /// are zero and the two arrays have equal length.
  void validate() const;
};

}  // namespace afmm
