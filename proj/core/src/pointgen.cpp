#include "afmm/pointgen.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "afmm/error.hpp"

namespace afmm {

void PointSet::validate() const {
  if (dim < 1 || dim > 3) throw InputError("point set dimension must be 1, 2 or 3");
  if (positions.size() != intensities.size())
    throw InputError("positions and intensities differ in length");
  for (std::size_t i = 0; i < positions.size(); ++i) {
    for (int a = 0; a < 3; ++a) {
      const double c = positions[i][a];
      const bool ok = a < dim ? (c >= 0.0 && c <= 1.0) : c == 0.0;
      if (!ok) {
        throw InputError("point " + std::to_string(i) + " lies outside the unit cube (axis " +
                         std::to_string(a) + " = " + std::to_string(c) + ")");
      }
    }
  }
}

DistributionKind parse_distribution_kind(std::string_view name) {
  if (name == "cantor") return DistributionKind::cantor;
  if (name == "uniform") return DistributionKind::uniform;
  if (name == "spiral") return DistributionKind::spiral;
  if (name == "singleton-stress") return DistributionKind::singleton_stress;
  throw ParameterError("unknown distribution kind '" + std::string(name) + "'");
}

std::string_view to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::cantor: return "cantor";
    case DistributionKind::uniform: return "uniform";
    case DistributionKind::spiral: return "spiral";
    case DistributionKind::singleton_stress: return "singleton-stress";
  }
  return "unknown";
}

namespace {

void check_cantor(double gamma, int dim) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ParameterError("gamma must lie in (0, 1)");
  if (dim < 1 || dim > 3) throw ParameterError("dim must be 1, 2 or 3");
}

double draw_intensity(IntensityRule rule, std::mt19937_64& rng) {
  if (rule == IntensityRule::constant_one) return 1.0;
  return std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
}

}  // namespace

PointSet generate_cantor(const FractalSpec& spec) {
  check_cantor(spec.gamma, spec.dim);
  if (spec.level < 0) throw ParameterError("cantor level must be >= 0");
  if (spec.level * spec.dim > 30) throw ParameterError("cantor level too large for full enumeration");

  const double right_shift = (1.0 + spec.gamma) / 2.0;  // offset of the right child interval
  const double scale = (1.0 - spec.gamma) / 2.0;

  // Left endpoints of the 2^level surviving 1D intervals, in increasing order.
  std::vector<double> lefts{0.0};
  double length = 1.0;
  for (int step = 0; step < spec.level; ++step) {
    std::vector<double> next;
    next.reserve(lefts.size() * 2);
    for (double a : lefts) {
      next.push_back(a);
      next.push_back(a + right_shift * length);
    }
    lefts = std::move(next);
    length *= scale;
  }

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::size_t per_axis = lefts.size();
  std::size_t total = 1;
  for (int a = 0; a < spec.dim; ++a) total *= per_axis;

  PointSet out;
  out.dim = spec.dim;
  out.positions.reserve(total);
  out.intensities.reserve(total);
  for (std::size_t flat = 0; flat < total; ++flat) {
    Point p{0.0, 0.0, 0.0};
    std::size_t rest = flat;
    for (int a = 0; a < spec.dim; ++a) {
      const double left = lefts[rest % per_axis];
      rest /= per_axis;
      const double frac = spec.placement == Placement::center ? 0.5 : unit(rng);
      p[a] = left + frac * length;
    }
    out.push_back(p, draw_intensity(spec.intensity, rng));
  }
  return out;
}

PointSet sample_cantor(const FractalSpec& spec, std::size_t n) {
  check_cantor(spec.gamma, spec.dim);
  if (spec.level < 0) throw ParameterError("cantor level must be >= 0");
  if (n == 0) throw ParameterError("sample size must be >= 1");

  const double right_shift = (1.0 + spec.gamma) / 2.0;
  const double scale = (1.0 - spec.gamma) / 2.0;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  PointSet out;
  out.dim = spec.dim;
  out.positions.reserve(n);
  out.intensities.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < spec.dim; ++a) {
      double left = 0.0;
      double length = 1.0;
      for (int step = 0; step < spec.level; ++step) {
        if (coin(rng)) left += right_shift * length;
        length *= scale;
      }
      const double frac = spec.placement == Placement::center ? 0.5 : unit(rng);
      p[a] = std::min(1.0, left + frac * length);
    }
    out.push_back(p, draw_intensity(spec.intensity, rng));
  }
  return out;
}

double cantor_dimension(double gamma, int dim) {
  check_cantor(gamma, dim);
  return -dim * std::log(2.0) / std::log((1.0 - gamma) / 2.0);
}

double gamma_for_dimension(double target_dimension, int dim) {
  if (dim < 1 || dim > 3) throw ParameterError("dim must be 1, 2 or 3");
  if (!(target_dimension > 0.0 && target_dimension < dim))
    throw ParameterError("target dimension must lie in (0, dim)");
  return 1.0 - 2.0 * std::exp2(-dim / target_dimension);
}

PointSet generate_standard(DistributionKind kind, std::size_t n, std::uint64_t seed,
                           IntensityRule intensity) {
  if (n == 0) throw ParameterError("point count must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  PointSet out;
  out.dim = 3;
  out.positions.reserve(n);
  out.intensities.reserve(n);
  switch (kind) {
    case DistributionKind::uniform:
      for (std::size_t i = 0; i < n; ++i) {
        Point p{unit(rng), unit(rng), unit(rng)};
        out.push_back(p, draw_intensity(intensity, rng));
      }
      break;
    case DistributionKind::spiral: {
      // Conical spiral winding into (1/2, 1/2, 0); z is stretched to fill [0, 1].
      const double turns = 16.0 * std::numbers::pi;
      for (std::size_t i = 0; i < n; ++i) {
        const double theta = turns * unit(rng);
        const double s = theta / turns;
        Point p{0.5 + 0.5 * s * std::cos(theta), 0.5 + 0.5 * s * std::sin(theta), s * s};
        out.push_back(p, draw_intensity(intensity, rng));
      }
      break;
    }
    default:
      throw ParameterError("generate_standard handles uniform and spiral only");
  }
  return out;
}

PointSet generate_singleton_stress(int steps, std::uint64_t seed) {
  if (steps < 0) throw ParameterError("steps must be >= 0");
  if (steps > kSingletonStressMaxSteps)
    throw ParameterError("singleton-stress steps above " + std::to_string(kSingletonStressMaxSteps) +
                         " exceed double precision");

  std::vector<double> lefts{0.0};
  double length = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double half = length / 2.0;
    std::vector<double> next;
    next.reserve(lefts.size() * 2);
    for (double a : lefts) {
      next.push_back(a);
      next.push_back(a + half);
    }
    lefts = std::move(next);
    length = std::ldexp(half, -(1 << i));
  }

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointSet out;
  out.dim = 1;
  for (double a : lefts) out.push_back(Point{a + unit(rng) * length, 0.0, 0.0}, 1.0);
  return out;
}

}  // namespace afmm
