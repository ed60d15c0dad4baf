#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "ballab/ball_geometry.hpp"
#include "ballab/holomap.hpp"
#include "ballab/quasi_random.hpp"
#include "ballab/sample_grid.hpp"

/// Fixed points, limits of iterates, the retraction rho_phi, and the linear
/// normal form V^{-1} phi_j V of a self-map with converging iterates.
namespace ballab::dynamics {

class NormalFormMismatch : public NumericError {
 public:
  NormalFormMismatch(const std::string& what, ComplexVec worst)
      : NumericError(what), worst_sample(std::move(worst)) {}
  ComplexVec worst_sample;
};

class NoCommonLimit : public NumericError {
 public:
  using NumericError::NumericError;
};

// ---------------------------------------------------------------------------
// Interior fixed points

struct FixedPointOptions {
  int starts = 32;
  int max_newton_steps = 100;
  int max_halvings = 30;
  double residual_tolerance = 1e-10;
  /// Accepted points satisfy |p| < 1 - boundary_margin.
  double boundary_margin = 1e-9;
  /// Newton iterates leaving this radius are pulled back onto it.
  double projection_radius = 1.0 - 1e-6;
  /// Final Newton correction must be below this; rejects slow convergence to
  /// multiple fixed points on the sphere.
  double step_tolerance = 1e-8;
  int orbit_steps = 200;
  std::uint64_t seed = kDefaultSeed;
};

namespace detail {

inline ComplexVec newton_step(const HoloMap& map, const ComplexVec& z, const ComplexVec& residual) {
  const int n = map.dim();
  ComplexMat j = map.jacobian(z) - ComplexMat::Identity(n, n);
  // Minimum-norm solution handles maps that fix a whole slice (singular J - I).
  Eigen::CompleteOrthogonalDecomposition<ComplexMat> cod(j);
  cod.setThreshold(1e-12);
  return cod.solve(-residual);
}

inline std::optional<ComplexVec> damped_newton(const HoloMap& map, ComplexVec z,
                                               const FixedPointOptions& opt) {
  try {
    ComplexVec f = map(z) - z;
    double fn = f.norm();
    for (int it = 0; it < opt.max_newton_steps && fn > 1e-15; ++it) {
      const ComplexVec delta = newton_step(map, z, f);
      bool accepted = false;
      double t = 1.0;
      for (int h = 0; h <= opt.max_halvings; ++h, t *= 0.5) {
        ComplexVec cand = z + t * delta;
        const double r = cand.norm();
        if (r > opt.projection_radius) cand *= opt.projection_radius / r;
        ComplexVec fc = map(cand) - cand;
        if (fc.norm() < fn) {
          z = std::move(cand);
          f = std::move(fc);
          fn = f.norm();
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (!(fn < opt.residual_tolerance)) return std::nullopt;
    if (!(z.norm() < 1.0 - opt.boundary_margin)) return std::nullopt;
    if (!(newton_step(map, z, f).norm() < opt.step_tolerance)) return std::nullopt;
    return z;
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Searches for p with |phi(p) - p| < 1e-10 inside the ball by damped Newton,
/// starting from the orbit limit of 0 and then from quasi-random interior points.
/// Absence of a result is a legitimate outcome.
inline std::optional<ComplexVec> find_interior_fixed_point(const HoloMap& map,
                                                           const FixedPointOptions& opt = {}) {
  const int n = map.dim();
  std::vector<ComplexVec> starts;
  try {
    ComplexVec z = ComplexVec::Zero(n);
    for (int i = 0; i < opt.orbit_steps; ++i) z = map(z);
    const double r = z.norm();
    if (r > opt.projection_radius) z *= opt.projection_radius / r;
    starts.push_back(z);
  } catch (const DomainError&) {
  }
  starts.push_back(ComplexVec::Zero(n));
  for (auto& p : ball_samples(n, opt.starts, 0.95, opt.seed)) starts.push_back(std::move(p));
  for (const auto& s : starts) {
    if (auto p = detail::damped_newton(map, s, opt)) return p;
  }
  return std::nullopt;
}

/// psi = phi_p o phi o phi_p, which fixes the origin. The automorphism is kept
/// in closed form, so no series truncation occurs. For p = 0 the map is
/// returned unchanged.
inline HoloMap conjugate_to_origin(const HoloMap& map, const ComplexVec& p) {
  require_same_dim(p, ComplexVec::Zero(map.dim()), "conjugate_to_origin");
  require_interior(p, "conjugate_to_origin");
  const double moved = (map(p) - p).norm();
  if (!(moved <= 1e-9)) {
    throw DomainError("conjugate_to_origin: point is not fixed (|phi(p) - p| = " +
                      std::to_string(moved) + ")");
  }
  if (p.norm() < 1e-12) return map;
  HoloMap swap = HoloMap::automorphism(p);
  HoloMap psi = HoloMap::chain({swap, map, swap});
  if (!(psi(ComplexVec::Zero(map.dim())).norm() < 1e-8)) {
    throw NumericError("conjugate_to_origin: conjugated map does not fix the origin");
  }
  return psi;
}

// ---------------------------------------------------------------------------
// Retraction estimate

enum class RetractionStatus { Converged, NoPeriodFound };

inline const char* to_string(RetractionStatus s) {
  return s == RetractionStatus::Converged ? "CONVERGED" : "NO_PERIOD_FOUND";
}

/// Deviation between phi_{k j/2} and phi_{k j} on the compact grid.
struct CauchyStep {
  int k = 0;
  long long j = 0;
  double deviation = 0.0;
};

struct RetractionOptions {
  int kmax = 24;
  double cauchy_tolerance = 1e-8;
  double grid_radius = 0.5;
  int grid_layers = 4;
  int grid_directions = 16;
  /// Per period k, iterates up to k * 2^max_doublings are examined.
  int max_doublings = 12;
  /// rho is phi_{k J 2^extra} where J is where the Cauchy test first passed twice.
  int rho_extra_doublings = 2;
  double eigen_cluster = 0.1;
  std::uint64_t seed = kDefaultSeed;
};

struct RetractionEstimate {
  RetractionStatus status = RetractionStatus::NoPeriodFound;
  int k = 0;
  HoloMap rho;  // valid only when converged
  long long rho_index = 0;
  ComplexMat d0_rho;
  std::vector<Complex> eigenvalues;
  /// n - s = dim M_phi.
  int s = 0;
  std::vector<CauchyStep> convergence_trace;

  bool converged() const { return status == RetractionStatus::Converged; }

  /// Multipliers j with phi_{kj} examined for the accepted period, starting at 1.
  std::vector<long long> accepted_multipliers() const {
    std::vector<long long> js = {1};
    for (const auto& c : convergence_trace) {
      if (c.k == k) js.push_back(c.j);
    }
    return js;
  }
};

/// Looks for a period k <= kmax such that phi_{kj} is Cauchy on a compact grid
/// of radius 0.5 along j = 1, 2, 4, ... and fits rho as a late iterate.
/// Requires phi(0) = 0.
inline RetractionEstimate estimate_retraction(const HoloMap& map, const RetractionOptions& opt = {}) {
  const int n = map.dim();
  if (!(map(ComplexVec::Zero(n)).norm() < 1e-10)) {
    throw DomainError("estimate_retraction: map must fix the origin");
  }
  const SampleGrid grid = SampleGrid::compact(n, opt.grid_radius, opt.grid_layers, opt.grid_directions,
                                              opt.seed);
  const auto points = grid.points();
  RetractionEstimate est;

  auto advance = [&](std::vector<ComplexVec>& xs, long long steps) {
    const HoloMap step = iterate_pointwise(map, steps);
    for (auto& x : xs) x = step(x);
  };

  for (int k = 1; k <= opt.kmax && !est.converged(); ++k) {
    std::vector<ComplexVec> cur = points;
    try {
      advance(cur, k);  // phi_k
    } catch (const DomainError&) {
      continue;
    }
    long long index = k;
    int passes = 0;
    for (int m = 0; m < opt.max_doublings; ++m) {
      std::vector<ComplexVec> next = cur;
      try {
        advance(next, index);  // phi_{2 index}
      } catch (const DomainError&) {
        break;
      }
      double dev = 0.0;
      for (std::size_t i = 0; i < cur.size(); ++i) dev = std::max(dev, (next[i] - cur[i]).norm());
      index *= 2;
      est.convergence_trace.push_back({k, index / k, dev});
      cur = std::move(next);
      passes = dev < opt.cauchy_tolerance ? passes + 1 : 0;
      if (passes == 2) {
        est.status = RetractionStatus::Converged;
        est.k = k;
        est.rho_index = index << opt.rho_extra_doublings;
        break;
      }
    }
  }
  if (!est.converged()) return est;

  est.rho = iterate_pointwise(map, est.rho_index);
  est.d0_rho = est.rho.jacobian(ComplexVec::Zero(n));
  Eigen::ComplexEigenSolver<ComplexMat> eig(est.d0_rho);
  est.s = 0;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const Complex lambda = eig.eigenvalues()[i];
    est.eigenvalues.push_back(lambda);
    if (std::abs(lambda) <= opt.eigen_cluster) {
      ++est.s;
    } else if (std::abs(lambda - 1.0) > opt.eigen_cluster) {
      throw InconsistencyError("estimate_retraction: eigenvalue " + std::to_string(lambda.real()) +
                               (lambda.imag() < 0 ? "" : "+") + std::to_string(lambda.imag()) +
                               "i of d0 rho is not near 0 or 1; the limit is not idempotent");
    }
  }
  return est;
}

// ---------------------------------------------------------------------------
// Normal form

struct BlockTracePoint {
  long long j = 0;
  /// sup over the compact grid of the first s components of V^{-1} phi_{kj}(w).
  double contracting_sup = 0.0;
};

struct NormalForm {
  ComplexMat V;
  int s = 0;
  /// 0_s (+) I_{n-s}
  ComplexMat projection;
  /// |V^{-1} d0rho V - P|
  double step1_residual = 0.0;
  /// sup |V^{-1} rho(V z) - P z| over samples
  double step2_residual = 0.0;
  /// sup over samples and trace multipliers of the last n - s components of
  /// V^{-1} phi_{kj}(V z) - z
  double step3_residual = 0.0;
  ComplexVec worst_sample;
  std::vector<BlockTracePoint> block_trace;
};

struct NormalFormOptions {
  int samples = 200;
  double sample_radius = 0.9;
  double tolerance = 1e-6;
  double grid_radius = 0.5;
  int grid_layers = 4;
  int grid_directions = 16;
  std::uint64_t seed = kDefaultSeed;
};

/// Change of basis V whose first s columns span ker d0rho and whose last n - s
/// columns span its range. An idempotent is diagonalizable, so
/// V^{-1} d0rho V = 0_s (+) I_{n-s}. The residuals check that rho itself and the
/// last n - s components of the iterates are linear in these coordinates.
///
/// The check runs on phi_k, whose iterates converge when phi has period k.
inline NormalForm normal_form(const RetractionEstimate& est, const HoloMap& map,
                              const NormalFormOptions& opt = {}) {
  if (!est.converged()) throw std::invalid_argument("normal_form: retraction estimate did not converge");
  const int n = map.dim();
  if (!(map(ComplexVec::Zero(n)).norm() < 1e-10)) {
    throw DomainError("normal_form: map must fix the origin");
  }
  const int s = est.s;
  NormalForm nf;
  nf.s = s;
  nf.projection = ComplexMat::Zero(n, n);
  for (int i = s; i < n; ++i) nf.projection(i, i) = 1.0;
  nf.V = ComplexMat::Identity(n, n);
  if (s > 0 && s < n) {
    Eigen::JacobiSVD<ComplexMat> svd(est.d0_rho, Eigen::ComputeFullU | Eigen::ComputeFullV);
    nf.V.leftCols(s) = svd.matrixV().rightCols(s);
    nf.V.rightCols(n - s) = svd.matrixU().leftCols(n - s);
  }
  Eigen::FullPivLU<ComplexMat> lu(nf.V);
  if (!lu.isInvertible()) throw NumericError("normal_form: basis matrix is singular");
  const ComplexMat Vinv = lu.inverse();
  nf.step1_residual = (Vinv * est.d0_rho * nf.V - nf.projection).norm();

  const auto samples = ball_samples(n, opt.samples, opt.sample_radius, opt.seed);
  double worst = -1.0;
  for (const auto& w : samples) {
    const ComplexVec z = Vinv * w;
    const double r = (Vinv * est.rho(w) - nf.projection * z).norm();
    nf.step2_residual = std::max(nf.step2_residual, r);
    if (r > worst) {
      worst = r;
      nf.worst_sample = w;
    }
  }

  const HoloMap period_map = iterate_pointwise(map, est.k);
  const auto grid = SampleGrid::compact(n, opt.grid_radius, opt.grid_layers, opt.grid_directions, opt.seed);
  for (long long j : est.accepted_multipliers()) {
    const HoloMap phij = iterate_pointwise(period_map, j);
    for (const auto& w : samples) {
      const ComplexVec z = Vinv * w;
      const ComplexVec img = Vinv * phij(w);
      const double r = (img.tail(n - s) - z.tail(n - s)).norm();
      nf.step3_residual = std::max(nf.step3_residual, r);
      if (r > worst) {
        worst = r;
        nf.worst_sample = w;
      }
    }
    BlockTracePoint bt{j, 0.0};
    if (s > 0) {
      for (const auto& w : grid.points()) {
        bt.contracting_sup = std::max(bt.contracting_sup, (Vinv * phij(w)).head(s).norm());
      }
    }
    nf.block_trace.push_back(bt);
  }

  if (nf.step2_residual > opt.tolerance || nf.step3_residual > opt.tolerance) {
    throw NormalFormMismatch("normal_form: NORMAL_FORM_MISMATCH (step 2 residual " +
                                 std::to_string(nf.step2_residual) + ", step 3 residual " +
                                 std::to_string(nf.step3_residual) + ")",
                             nf.worst_sample);
  }
  return nf;
}

/// max over interior samples of |rho(z) - d0rho z|. A retraction fixing the
/// origin is linear, so this should vanish.
inline double verify_linear_retraction(const RetractionEstimate& est, int samples = 200,
                                       double radius = 0.9, std::uint64_t seed = kDefaultSeed) {
  if (!est.converged()) {
    throw std::invalid_argument("verify_linear_retraction: retraction estimate did not converge");
  }
  const int n = est.rho.dim();
  if (!(est.rho(ComplexVec::Zero(n)).norm() < 1e-10)) {
    throw DomainError("verify_linear_retraction: rho must fix the origin");
  }
  double worst = 0.0;
  for (const auto& z : ball_samples(n, samples, radius, seed)) {
    worst = std::max(worst, (est.rho(z) - est.d0_rho * z).norm());
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Boundary limit

struct DenjoyWolffEstimate {
  /// Common limit, normalized to the unit sphere.
  ComplexVec point;
  /// Largest distance between the normalized limits of different seeds.
  double scatter = 0.0;
  /// 1 - |limit| for the origin seed before normalization.
  double boundary_gap = 0.0;
  long long max_steps_used = 0;
};

struct DenjoyWolffOptions {
  double step_tolerance = 1e-9;
  long long max_steps = 10000;
  double scatter_tolerance = 1e-6;
};

/// Iterates a handful of interior seeds until successive iterates stall and
/// returns their common boundary limit. Meant for maps without an interior
/// fixed point.
inline DenjoyWolffEstimate denjoy_wolff_estimate(const HoloMap& map, const DenjoyWolffOptions& opt = {}) {
  const int n = map.dim();
  std::vector<ComplexVec> seeds = {ComplexVec::Zero(n)};
  for (int i = 0; i < n; ++i) {
    seeds.push_back(0.5 * basis_vector(n, i));
    seeds.push_back(-0.5 * basis_vector(n, i));
    seeds.push_back(Complex(0.0, 0.5) * basis_vector(n, i));
  }
  DenjoyWolffEstimate out;
  std::vector<ComplexVec> limits;
  for (std::size_t si = 0; si < seeds.size(); ++si) {
    ComplexVec z = seeds[si];
    long long steps = 0;
    for (; steps < opt.max_steps; ++steps) {
      ComplexVec next;
      try {
        next = map(z);
      } catch (const DomainError&) {
        break;  // numerically on the boundary already
      }
      const double d = (next - z).norm();
      z = std::move(next);
      if (d < opt.step_tolerance) break;
    }
    out.max_steps_used = std::max(out.max_steps_used, steps);
    if (si == 0) out.boundary_gap = 1.0 - z.norm();
    if (z.norm() == 0.0) throw NoCommonLimit("denjoy_wolff_estimate: orbit converged to the origin");
    limits.push_back(z / z.norm());
  }
  out.point = limits.front();
  for (const auto& l : limits) out.scatter = std::max(out.scatter, (l - out.point).norm());
  if (out.scatter > opt.scatter_tolerance) {
    throw NoCommonLimit("denjoy_wolff_estimate: NO_COMMON_LIMIT (seed scatter " +
                        std::to_string(out.scatter) + ")");
  }
  return out;
}

}  // namespace ballab::dynamics
