#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "afmm/point_set.hpp"
#include "afmm/tree.hpp"

namespace afmm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Tensor-product Chebyshev interpolation with r roots of T_r per axis.
///
/// The 1D interpolation weight of node m at x in [-1, 1] is
///   S_r(x, x_m) = 1/r + (2/r) sum_{k=1}^{r-1} T_k(x) T_k(x_m),
/// and multi-dimensional weights are products over the axes. Grid index
/// m = m_0 + r m_1 + r^2 m_2.
class ChebyshevBasis {
 public:
  ChebyshevBasis(int order, int dim);

  int order() const { return order_; }
  int dim() const { return dim_; }
  int size() const { return size_; }  // r^dim
  std::span<const double> nodes() const { return nodes_; }

  /// out[m] = S_r(x, x_m) for the r roots; x in reference coordinates [-1, 1].
  void weights_1d(double x, std::span<double> out) const;

  /// Tensor weights of a point given in reference coordinates.
  void weights(const Point& reference, std::span<double> out) const;

  /// Chebyshev grid of `cube` in physical coordinates.
  std::vector<Point> grid(const Cube& cube) const;

  /// Reference coordinates of grid node m.
  Point reference_node(int m) const;

 private:
  int order_;
  int dim_;
  int size_;
  std::vector<double> nodes_;
  std::vector<double> node_cheb_;  // T_k(x_m), row m, column k
};

/// Maps a point of `cube` to [-1, 1]^dim.
Point to_reference(const Point& p, const Cube& cube, int dim);

/// Row i, column m: tensor interpolation weight of grid node m at point i.
/// Rows sum to one. Points outside the cube violate the contract.
Matrix interp_matrix(std::span<const Point> points, const Cube& cube, const ChebyshevBasis& basis);

}  // namespace afmm
