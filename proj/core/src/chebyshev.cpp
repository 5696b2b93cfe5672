#include "afmm/chebyshev.hpp"

#include <cmath>
#include <numbers>

#include "afmm/error.hpp"

namespace afmm {

ChebyshevBasis::ChebyshevBasis(int order, int dim) : order_(order), dim_(dim) {
  if (order < 1 || order > 64) throw ParameterError("Chebyshev order must be in [1, 64]");
  if (dim < 1 || dim > 3) throw ParameterError("dim must be 1, 2 or 3");
  size_ = 1;
  for (int a = 0; a < dim; ++a) size_ *= order;
  nodes_.resize(order);
  node_cheb_.resize(static_cast<std::size_t>(order) * order);
  for (int m = 0; m < order; ++m) {
    nodes_[m] = std::cos((2 * m + 1) * std::numbers::pi / (2.0 * order));
    double t_prev = 1.0, t_cur = nodes_[m];
    node_cheb_[m * order] = 1.0;
    if (order > 1) node_cheb_[m * order + 1] = t_cur;
    for (int k = 2; k < order; ++k) {
      const double t_next = 2.0 * nodes_[m] * t_cur - t_prev;
      t_prev = t_cur;
      t_cur = t_next;
      node_cheb_[m * order + k] = t_cur;
    }
  }
}

void ChebyshevBasis::weights_1d(double x, std::span<double> out) const {
  const int r = order_;
  double cheb[64];
  cheb[0] = 1.0;
  if (r > 1) cheb[1] = x;
  for (int k = 2; k < r; ++k) cheb[k] = 2.0 * x * cheb[k - 1] - cheb[k - 2];
  for (int m = 0; m < r; ++m) {
    double s = 0.0;
    const double* tm = &node_cheb_[m * r];
    for (int k = 1; k < r; ++k) s += cheb[k] * tm[k];
    out[m] = (1.0 + 2.0 * s) / r;
  }
}

void ChebyshevBasis::weights(const Point& reference, std::span<double> out) const {
  const int r = order_;
  double axis[3][64];
  for (int a = 0; a < dim_; ++a) weights_1d(reference[a], std::span<double>(axis[a], r));
  if (dim_ == 1) {
    for (int m = 0; m < r; ++m) out[m] = axis[0][m];
  } else if (dim_ == 2) {
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i) out[i + r * j] = axis[0][i] * axis[1][j];
  } else {
    for (int k = 0; k < r; ++k)
      for (int j = 0; j < r; ++j) {
        const double yz = axis[1][j] * axis[2][k];
        for (int i = 0; i < r; ++i) out[i + r * (j + r * k)] = axis[0][i] * yz;
      }
  }
}

Point ChebyshevBasis::reference_node(int m) const {
  Point p{0.0, 0.0, 0.0};
  for (int a = 0; a < dim_; ++a) {
    p[a] = nodes_[m % order_];
    m /= order_;
  }
  return p;
}

std::vector<Point> ChebyshevBasis::grid(const Cube& cube) const {
  std::vector<Point> out(size_);
  const double half = cube.edge / 2.0;
  for (int m = 0; m < size_; ++m) {
    const Point ref = reference_node(m);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = cube.lower[a] + half * (ref[a] + 1.0);
    out[m] = p;
  }
  return out;
}

Point to_reference(const Point& p, const Cube& cube, int dim) {
  Point ref{0.0, 0.0, 0.0};
  const double scale = 2.0 / cube.edge;
  for (int a = 0; a < dim; ++a) ref[a] = (p[a] - cube.lower[a]) * scale - 1.0;
  return ref;
}

Matrix interp_matrix(std::span<const Point> points, const Cube& cube, const ChebyshevBasis& basis) {
  const int dim = basis.dim();
  Matrix out(static_cast<Eigen::Index>(points.size()), basis.size());
  std::vector<double> row(basis.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!cube.contains(points[i], dim, 1e-12 * cube.edge))
      throw ContractViolation("interp_matrix: point outside the grid's cube");
    basis.weights(to_reference(points[i], cube, dim), row);
    for (int m = 0; m < basis.size(); ++m) out(static_cast<Eigen::Index>(i), m) = row[m];
  }
  return out;
}

}  // namespace afmm
