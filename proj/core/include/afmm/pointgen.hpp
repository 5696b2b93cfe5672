#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "afmm/point_set.hpp"

namespace afmm {

enum class DistributionKind { cantor, uniform, spiral, singleton_stress };
enum class Placement { center, random_in_leaf };
enum class IntensityRule { constant_one, random_uniform };

DistributionKind parse_distribution_kind(std::string_view name);
std::string_view to_string(DistributionKind kind);

/// Parameters of a fractal (or standard) point distribution.
///
/// For the generalized Cantor family the construction removes an open middle
/// segment of relative length `gamma` from every interval, `level` times, and
/// takes the `dim`-fold tensor product of the surviving intervals.
struct FractalSpec {
  DistributionKind kind = DistributionKind::cantor;
  double gamma = 1.0 / 3.0;
  int level = 0;
  int dim = 3;
  std::uint64_t seed = 0;
  Placement placement = Placement::center;
  IntensityRule intensity = IntensityRule::constant_one;
};

/// One point per surviving box at step `level`: 2^(dim*level) points.
PointSet generate_cantor(const FractalSpec& spec);

/// `n` points drawn from the level-`level` truncation of the Cantor measure:
/// every 1D digit is an independent fair coin, so each point picks a random
/// surviving box. Used when N is not a power of 2^dim.
PointSet sample_cantor(const FractalSpec& spec, std::size_t n);

/// d_H = -dim * log 2 / log((1 - gamma) / 2).
double cantor_dimension(double gamma, int dim);

/// Inverse of cantor_dimension: gamma = 1 - 2 * 2^(-dim / target).
double gamma_for_dimension(double target_dimension, int dim);

/// Uniform i.i.d. points or a conical spiral accumulating at (1/2, 1/2, 0), both in 3D.
PointSet generate_standard(DistributionKind kind, std::size_t n, std::uint64_t seed,
                           IntensityRule intensity = IntensityRule::constant_one);

inline constexpr int kSingletonStressMaxSteps = 6;

/// 2^steps points in [0,1] (dim = 1) whose binary tree has singleton branches
/// of length growing with N. At step i = 0..steps-1 every interval is halved
/// and each half shrunk by 2^(2^i) towards its left end.
PointSet generate_singleton_stress(int steps, std::uint64_t seed);

}  // namespace afmm
