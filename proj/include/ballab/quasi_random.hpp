#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ballab/core.hpp"

namespace ballab {

inline constexpr std::uint64_t kDefaultSeed = 20240611;

/// Radical inverse of `index` in the given prime base.
inline double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

/// Halton sequence with a Cranley-Patterson shift drawn from `seed`.
/// Supports up to 32 dimensions.
class ShiftedHalton {
 public:
  ShiftedHalton(int dims, std::uint64_t seed) : dims_(dims), shift_(dims) {
    if (dims < 1 || dims > static_cast<int>(kPrimes.size())) {
      throw std::invalid_argument("ShiftedHalton: unsupported dimension");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& s : shift_) s = u(rng);
  }

  /// Point `index` (1-based internally so the origin is never produced).
  std::vector<double> point(std::uint64_t index) const {
    std::vector<double> x(dims_);
    for (int d = 0; d < dims_; ++d) {
      double v = radical_inverse(index + 1, kPrimes[d]) + shift_[d];
      x[d] = v - std::floor(v);
    }
    return x;
  }

 private:
  static constexpr std::array<unsigned, 32> kPrimes = {
      2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53,
      59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131};
  int dims_;
  std::vector<double> shift_;
};

/// Unit vectors of C^n. For n = 1 these are equally spaced phases; for n >= 2
/// the coordinate axes come first, followed by quasi-random directions.
inline std::vector<ComplexVec> unit_directions(int n, int count, std::uint64_t seed) {
  std::vector<ComplexVec> dirs;
  dirs.reserve(static_cast<std::size_t>(count));
  if (n == 1) {
    std::mt19937_64 rng(seed);
    double phase = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    for (int i = 0; i < count; ++i) {
      double theta = 2.0 * std::numbers::pi * (i + phase) / count;
      ComplexVec v(1);
      v[0] = std::polar(1.0, theta);
      dirs.push_back(v);
    }
    return dirs;
  }
  for (int i = 0; i < n && static_cast<int>(dirs.size()) < count; ++i) {
    dirs.push_back(basis_vector(n, i));
  }
  ShiftedHalton halton(2 * n, seed);
  std::uint64_t index = 0;
  while (static_cast<int>(dirs.size()) < count) {
    auto u = halton.point(index++);
    ComplexVec v(n);
    // Box-Muller on consecutive coordinate pairs gives a rotation-invariant direction.
    for (int i = 0; i < n; ++i) {
      double r = std::sqrt(-2.0 * std::log(std::max(u[2 * i], 1e-300)));
      double t = 2.0 * std::numbers::pi * u[2 * i + 1];
      v[i] = Complex(r * std::cos(t), r * std::sin(t));
    }
    double norm = v.norm();
    if (norm < 1e-12) continue;
    dirs.push_back(v / norm);
  }
  return dirs;
}

/// `count` quasi-random points of the ball of radius `max_radius`, uniform in volume.
inline std::vector<ComplexVec> ball_samples(int n, int count, double max_radius, std::uint64_t seed) {
  auto dirs = unit_directions(n, count, seed);
  ShiftedHalton radial(1, seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<ComplexVec> pts;
  pts.reserve(dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    double u = radial.point(i)[0];
    double r = max_radius * std::pow(u, 1.0 / (2.0 * n));
    pts.push_back(r * dirs[i]);
  }
  return pts;
}

}  // namespace ballab
