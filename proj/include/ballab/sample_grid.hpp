#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "ballab/core.hpp"
#include "ballab/quasi_random.hpp"

namespace ballab {

/// Product grid {r * u} of radii and unit directions, a finite stand-in for
/// the open ball when estimating sup norms.
class SampleGrid {
 public:
  SampleGrid(std::vector<double> radii, std::vector<ComplexVec> directions)
      : radii_(std::move(radii)), directions_(std::move(directions)) {
    if (radii_.empty() || directions_.empty()) {
      throw std::invalid_argument("SampleGrid: need at least one radius and one direction");
    }
    for (std::size_t i = 0; i < radii_.size(); ++i) {
      if (!(radii_[i] > 0.0 && radii_[i] < 1.0)) {
        throw DomainError("SampleGrid: radii must lie in (0, 1)");
      }
      if (i > 0 && !(radii_[i] > radii_[i - 1])) {
        throw std::invalid_argument("SampleGrid: radii must be strictly increasing");
      }
    }
    const auto n = directions_.front().size();
    for (const auto& d : directions_) {
      if (d.size() != n) throw DimensionMismatch("SampleGrid: directions differ in dimension");
      if (std::abs(d.norm() - 1.0) > 1e-12) throw DomainError("SampleGrid: directions must be unit vectors");
    }
  }

  /// Radii 1/4, 1/2, 3/4 and 1 - 10^-m for m = 1..max_exponent.
  static SampleGrid near_boundary(int n, int directions, std::uint64_t seed = kDefaultSeed,
                                  int max_exponent = 8) {
    return SampleGrid(near_boundary_radii(max_exponent), unit_directions(n, directions, seed));
  }

  static std::vector<double> near_boundary_radii(int max_exponent = 8) {
    std::vector<double> radii = {0.25, 0.5, 0.75};
    for (int m = 1; m <= max_exponent; ++m) radii.push_back(1.0 - std::pow(10.0, -m));
    return radii;
  }

  /// `layers` equally spaced radii up to `radius`.
  static SampleGrid compact(int n, double radius, int layers, int directions,
                            std::uint64_t seed = kDefaultSeed) {
    std::vector<double> radii;
    for (int l = 1; l <= layers; ++l) radii.push_back(radius * l / layers);
    return SampleGrid(std::move(radii), unit_directions(n, directions, seed));
  }

  int dim() const { return static_cast<int>(directions_.front().size()); }
  const std::vector<double>& radii() const { return radii_; }
  const std::vector<ComplexVec>& directions() const { return directions_; }
  double max_radius() const { return radii_.back(); }
  std::size_t size() const { return radii_.size() * directions_.size(); }
  std::size_t layer_of(std::size_t index) const { return index / directions_.size(); }

  ComplexVec point(std::size_t index) const {
    return radii_[layer_of(index)] * directions_[index % directions_.size()];
  }

  std::vector<ComplexVec> points() const {
    std::vector<ComplexVec> pts;
    pts.reserve(size());
    for (std::size_t i = 0; i < size(); ++i) pts.push_back(point(i));
    return pts;
  }

 private:
  std::vector<double> radii_;
  std::vector<ComplexVec> directions_;
};

}  // namespace ballab
