#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string_view>

#include "afmm/point_set.hpp"

namespace afmm {

/// Scalar interaction K(source, target), used off the diagonal only.
class Kernel {
 public:
  virtual ~Kernel() = default;
  virtual double operator()(const Point& source, const Point& target) const = 0;
  virtual std::string_view name() const = 0;
  /// p such that K(s x, s y) = s^p K(x, y), when the kernel is homogeneous.
  virtual std::optional<double> homogeneity_degree() const { return std::nullopt; }
  virtual bool symmetric() const { return true; }
  /// K depends on target - source only; required for offset-keyed M2L caching.
  virtual bool translation_invariant() const { return true; }
};

/// 1 / |x - y|
class LaplaceKernel final : public Kernel {
 public:
  double operator()(const Point& x, const Point& y) const override {
    const double dx = x[0] - y[0], dy = x[1] - y[1], dz = x[2] - y[2];
    return 1.0 / std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  std::string_view name() const override { return "laplace"; }
  std::optional<double> homogeneity_degree() const override { return -1.0; }
};

/// exp(-|x - y|^2 / width^2); smooth and not homogeneous.
class GaussianKernel final : public Kernel {
 public:
  explicit GaussianKernel(double width = 0.5) : inv_w2_(1.0 / (width * width)) {}
  double operator()(const Point& x, const Point& y) const override {
    const double dx = x[0] - y[0], dy = x[1] - y[1], dz = x[2] - y[2];
    return std::exp(-(dx * dx + dy * dy + dz * dz) * inv_w2_);
  }
  std::string_view name() const override { return "gaussian"; }

 private:
  double inv_w2_;
};

/// "laplace" or "gaussian"; ParameterError otherwise.
std::unique_ptr<Kernel> make_kernel(std::string_view name);

}  // namespace afmm
