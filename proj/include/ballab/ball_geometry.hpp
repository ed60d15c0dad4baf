#pragma once

#include <cmath>

#include "ballab/core.hpp"

/// Exact geometry of the unit ball B_n of C^n: the involutive automorphisms,
/// the Bergman (equivalently Kobayashi) distance, Bergman balls as Euclidean
/// ellipsoids, and the boundary ellipsoids E(k, zeta).
namespace ballab::geometry {

/// Orthogonal projection of z onto span{a}. Requires a != 0.
inline ComplexVec project_onto(const ComplexVec& a, const ComplexVec& z) {
  return (inner(z, a) / a.squaredNorm()) * a;
}

/// Involutive automorphism phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>).
///
/// phi_a swaps 0 and a and satisfies phi_a(phi_a(z)) = z. For a = 0 the
/// formula degenerates; phi_0(z) = -z is used, which keeps |phi_0(w)| = |w|.
inline ComplexVec involution(const ComplexVec& a, const ComplexVec& z) {
  require_same_dim(a, z, "involution");
  require_interior(a, "involution (center)");
  require_interior(z, "involution (argument)");
  const double a2 = a.squaredNorm();
  if (a2 == 0.0) return -z;
  const ComplexVec pz = project_onto(a, z);
  const ComplexVec qz = z - pz;
  const double sa = std::sqrt(1.0 - a2);
  return (a - pz - sa * qz) / (1.0 - inner(z, a));
}

/// beta(z, w) = (1/2) log((1 + |phi_z(w)|) / (1 - |phi_z(w)|)) = atanh|phi_z(w)|.
inline double bergman_distance(const ComplexVec& z, const ComplexVec& w) {
  require_same_dim(z, w, "bergman_distance");
  require_interior(z, "bergman_distance");
  require_interior(w, "bergman_distance");
  const double x = std::min(involution(z, w).norm(), 1.0);
  // 1 - x^2 from the closed form keeps precision when x is close to 1.
  const double one_minus_x2 =
      (1.0 - z.squaredNorm()) * (1.0 - w.squaredNorm()) / std::norm(1.0 - inner(w, z));
  return 0.5 * std::log((1.0 + x) * (1.0 + x) / one_minus_x2);
}

/// Metric ball B(a, r) = {z : beta(a, z) < r}, stored with the parameters of
/// its ellipsoid description.
class BergmanBall {
 public:
  BergmanBall(ComplexVec center, double radius) : center_(std::move(center)), radius_(radius) {
    require_interior(center_, "BergmanBall");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
      throw DomainError("BergmanBall: radius must be positive and finite");
    }
    R_ = std::tanh(radius_);
    const double a2 = center_.squaredNorm();
    const double denom = 1.0 - R_ * R_ * a2;
    a_r_ = ((1.0 - R_ * R_) / denom) * center_;
    s_ = (1.0 - a2) / denom;
  }

  const ComplexVec& center() const { return center_; }
  double radius() const { return radius_; }
  /// Euclidean scale R = tanh r.
  double R() const { return R_; }
  /// Ellipsoid center a_r = (1 - R^2) a / (1 - R^2 |a|^2).
  const ComplexVec& shifted_center() const { return a_r_; }
  /// s = (1 - |a|^2) / (1 - R^2 |a|^2).
  double s() const { return s_; }

  bool contains(const ComplexVec& zeta) const {
    require_same_dim(center_, zeta, "BergmanBall::contains");
    require_interior(zeta, "BergmanBall::contains");
    if (center_.squaredNorm() == 0.0) return zeta.norm() < R_;
    const ComplexVec p = project_onto(center_, zeta);
    const ComplexVec q = zeta - p;
    const double R2 = R_ * R_;
    return (p - a_r_).squaredNorm() / (R2 * s_ * s_) + q.squaredNorm() / (R2 * s_) < 1.0;
  }

 private:
  ComplexVec center_;
  double radius_;
  double R_ = 0.0;
  ComplexVec a_r_;
  double s_ = 1.0;
};

inline bool bergman_ball_contains(const BergmanBall& ball, const ComplexVec& zeta) {
  return ball.contains(zeta);
}

/// Membership in E(k, zeta) = {z : |1 - <z, zeta>|^2 <= k (1 - |z|^2)}.
inline bool ellipsoid_E_contains(double k, const ComplexVec& zeta, const ComplexVec& z) {
  require_same_dim(zeta, z, "ellipsoid_E_contains");
  if (!(k > 0.0)) throw DomainError("ellipsoid_E_contains: k must be positive");
  if (std::abs(zeta.norm() - 1.0) > 1e-12) {
    throw DomainError("ellipsoid_E_contains: zeta must lie on the unit sphere");
  }
  require_interior(z, "ellipsoid_E_contains");
  return std::norm(1.0 - inner(z, zeta)) <= k * (1.0 - z.squaredNorm());
}

/// beta(z, w) - |z - w| / 2, which is never negative.
inline double p4_gap(const ComplexVec& z, const ComplexVec& w) {
  return bergman_distance(z, w) - 0.5 * (z - w).norm();
}

}  // namespace ballab::geometry
