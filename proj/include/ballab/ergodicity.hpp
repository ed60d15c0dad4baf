#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ballab/ball_geometry.hpp"
#include "ballab/dynamics.hpp"
#include "ballab/holomap.hpp"
#include "ballab/sample_grid.hpp"

/// Cesaro means of composition operators, sup-norm estimates over the ball and
/// the mean-ergodicity classifier built on them.
namespace ballab::ergodicity {

class GridEvaluationError : public NumericError {
 public:
  GridEvaluationError(const std::string& what, ComplexVec at) : NumericError(what), point(std::move(at)) {}
  ComplexVec point;
};

class BadTestFunction : public NumericError {
 public:
  using NumericError::NumericError;
};

// ---------------------------------------------------------------------------
// Sup norms

struct SupEstimate {
  double value = 0.0;
  ComplexVec argmax;
  /// Grid maximum per radius, before refinement.
  std::vector<double> layer_max;
};

namespace detail {

inline double magnitude(const Complex& v) { return std::abs(v); }
inline double magnitude(const ComplexVec& v) { return v.norm(); }

template <class G>
double checked_magnitude(G& g, const ComplexVec& z) {
  double v;
  try {
    v = magnitude(g(z));
  } catch (const std::exception& e) {
    throw GridEvaluationError(std::string("sup_norm_estimate: evaluation failed: ") + e.what(), z);
  }
  if (!std::isfinite(v)) throw GridEvaluationError("sup_norm_estimate: non-finite value", z);
  return v;
}

}  // namespace detail

/// max over the grid of |g|, then coordinate-wise hill climbing around the
/// argmax. Refined points never leave the grid's largest radius.
template <class G>
SupEstimate sup_norm_estimate(G&& g, const SampleGrid& grid, int refine_steps = 20) {
  SupEstimate est;
  est.layer_max.assign(grid.radii().size(), 0.0);
  est.value = -1.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const ComplexVec z = grid.point(i);
    const double v = detail::checked_magnitude(g, z);
    auto& lm = est.layer_max[grid.layer_of(i)];
    lm = std::max(lm, v);
    if (v > est.value) {
      est.value = v;
      est.argmax = z;
    }
  }

  const double rmax = grid.max_radius();
  const int n = grid.dim();
  double h = 0.05;
  const Complex moves[4] = {1.0, -1.0, Complex(0, 1), Complex(0, -1)};
  for (int step = 0; step < refine_steps; ++step) {
    bool improved = false;
    for (int c = 0; c < n; ++c) {
      for (const Complex& mv : moves) {
        ComplexVec cand = est.argmax;
        cand[c] += h * mv;
        const double r = cand.norm();
        if (r > rmax) cand *= rmax / r;
        const double v = detail::checked_magnitude(g, cand);
        if (v > est.value) {
          est.value = v;
          est.argmax = std::move(cand);
          improved = true;
        }
      }
    }
    if (!improved) h *= 0.5;
  }
  return est;
}

// ---------------------------------------------------------------------------
// Criterion (iii)

enum class CriterionOutcome { Holds, Fails, Undecided };

inline const char* to_string(CriterionOutcome o) {
  switch (o) {
    case CriterionOutcome::Holds: return "HOLDS";
    case CriterionOutcome::Fails: return "FAILS";
    default: return "UNDECIDED";
  }
}

struct CriterionOptions {
  /// Largest iterate index k j examined.
  long long budget = 1024;
  double decay_threshold = 1e-4;
  double nondecay_factor = 0.5;
  /// Allowed relative growth between successive entries of a decaying trace.
  double monotone_slack = 0.1;
  /// Outer-layer growth ratio above which the grid no longer resolves the sup.
  double steep_ratio = 2.0;
  int refine_steps = 20;
};

struct CriterionEntry {
  long long j = 0;        // multiplier
  long long iterate = 0;  // k j
  double value = 0.0;     // estimated sup |phi_kj - rho|
  ComplexVec argmax;
  std::vector<double> layer_max;
};

struct CriterionResult {
  std::vector<CriterionEntry> trace;
  CriterionOutcome outcome = CriterionOutcome::Undecided;
  /// First multiplier whose sup the grid cannot resolve; the schedule stops there.
  std::optional<long long> horizon;
};

namespace detail {

inline bool steep_outer(const std::vector<double>& p, double ratio) {
  if (p.size() < 2) return false;
  const double out = p.back(), prev = p[p.size() - 2];
  return out > 0.0 && out > ratio * prev;
}

inline bool flat_outer(const std::vector<double>& p) {
  if (p.size() < 2) return true;
  return !(p.back() > 1.01 * p[p.size() - 2]);
}

/// The sup of a near-boundary peak is lost once the peak moves outside the
/// largest grid radius: the value collapses while the profile is still rising
/// at the outer layer, or vanishes after a rising profile.
inline bool unresolved(const CriterionEntry& prev, const CriterionEntry& cur, const CriterionOptions& opt) {
  if (!(prev.value >= opt.decay_threshold)) return false;
  if (!(cur.value < 0.5 * prev.value)) return false;
  if (steep_outer(cur.layer_max, opt.steep_ratio)) return true;
  return !cur.layer_max.empty() && cur.layer_max.back() == 0.0 && !flat_outer(prev.layer_max);
}

}  // namespace detail

inline CriterionOutcome decide(const std::vector<CriterionEntry>& trace, const CriterionOptions& opt) {
  if (trace.size() >= 2 && trace.back().value < opt.decay_threshold) {
    bool monotone = true;
    for (std::size_t i = 1; i < trace.size(); ++i) {
      monotone = monotone && trace[i].value <= (1.0 + opt.monotone_slack) * trace[i - 1].value + 1e-12;
    }
    if (monotone) return CriterionOutcome::Holds;
  }
  if (trace.size() >= 3) {
    const double floor = opt.nondecay_factor * trace.front().value;
    const bool stays = std::all_of(trace.begin(), trace.end(),
                                   [&](const CriterionEntry& e) { return e.value >= floor; });
    if (stays && trace.front().value > 0.0) return CriterionOutcome::Fails;
  }
  return CriterionOutcome::Undecided;
}

/// Estimates sup |phi_kj - rho| on the grid for j = 1, 2, 4, ... while kj stays
/// within the budget.
inline CriterionResult criterion_iii_check(const HoloMap& map, const dynamics::RetractionEstimate& est,
                                           const SampleGrid& grid, const CriterionOptions& opt = {}) {
  if (!est.converged()) throw std::invalid_argument("criterion_iii_check: retraction estimate did not converge");
  CriterionResult res;
  for (long long j = 1; est.k * j <= opt.budget; j *= 2) {
    const HoloMap phi = iterate_pointwise(map, est.k * j);
    auto diff = [&](const ComplexVec& z) -> ComplexVec { return phi(z) - est.rho(z); };
    SupEstimate s = sup_norm_estimate(diff, grid, opt.refine_steps);
    CriterionEntry e{j, est.k * j, s.value, std::move(s.argmax), std::move(s.layer_max)};
    if (!res.trace.empty() && detail::unresolved(res.trace.back(), e, opt)) {
      res.horizon = j;
      break;
    }
    res.trace.push_back(std::move(e));
  }
  res.outcome = decide(res.trace, opt);
  return res;
}

// ---------------------------------------------------------------------------
// Test functions and Cesaro means

struct TestFunction {
  std::string name;
  std::function<Complex(const ComplexVec&)> f;
  /// sup |f| on the ball
  double bound = 1.0;
  /// Lipschitz constant on the ball
  double lipschitz = 1.0;

  Complex operator()(const ComplexVec& z) const { return f(z); }
};

inline TestFunction monomial_function(const MultiIndex& m) {
  std::string name;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i] == 0) continue;
    if (!name.empty()) name += "*";
    name += "z" + std::to_string(i + 1);
    if (m[i] > 1) name += "^" + std::to_string(m[i]);
  }
  if (name.empty()) name = "1";
  const int d = total_degree(m);
  return {name,
          [m](const ComplexVec& z) {
            Complex v = 1.0;
            for (std::size_t i = 0; i < m.size(); ++i) {
              for (int e = 0; e < m[i]; ++e) v *= z[static_cast<Eigen::Index>(i)];
            }
            return v;
          },
          1.0, static_cast<double>(d)};
}

/// Monomials z^m with |m| <= 3 (including the coordinates) and (1 + z1)/2.
inline std::vector<TestFunction> test_battery(int n) {
  if (n < 1) throw std::invalid_argument("test_battery: n must be positive");
  std::vector<TestFunction> out;
  MultiIndex m(n, 0);
  std::function<void(int, int)> rec = [&](int var, int left) {
    if (var == n - 1) {
      m[var] = left;
      out.push_back(monomial_function(m));
    } else {
      for (int e = left; e >= 0; --e) {
        m[var] = e;
        rec(var + 1, left - e);
      }
    }
    m[var] = 0;
  };
  for (int d = 0; d <= 3; ++d) rec(0, d);
  out.push_back({"(1+z1)/2", [](const ComplexVec& z) { return (1.0 + z[0]) / 2.0; }, 1.0, 0.5});
  return out;
}

namespace detail {

inline Complex bounded_value(const TestFunction& f, const ComplexVec& z) {
  const Complex v = f(z);
  if (!(std::abs(v) <= f.bound + 1e-12)) {
    throw BadTestFunction("test function " + f.name + " exceeds its declared bound " +
                          std::to_string(f.bound));
  }
  return v;
}

}  // namespace detail

/// M_j(C_phi) f (z) = (1/j) sum_{i=1..j} f(phi_i(z)), along one forward orbit.
inline Complex cesaro_mean_at(const HoloMap& map, const TestFunction& f, long long j, const ComplexVec& z) {
  if (j < 1) throw std::invalid_argument("cesaro_mean: j must be positive");
  Complex sum = 0.0;
  ComplexVec w = z;
  for (long long i = 1; i <= j; ++i) {
    w = map(w);
    sum += detail::bounded_value(f, w);
  }
  return sum / static_cast<double>(j);
}

inline std::vector<Complex> cesaro_mean(const HoloMap& map, const TestFunction& f, long long j,
                                        const std::vector<ComplexVec>& points) {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto& z : points) out.push_back(cesaro_mean_at(map, f, j, z));
  return out;
}

inline std::vector<Complex> cesaro_mean(const HoloMap& map, const TestFunction& f, long long j,
                                        const SampleGrid& grid) {
  return cesaro_mean(map, f, j, grid.points());
}

/// Pf (z) = (1/k) sum_{i=0..k-1} f(rho(phi_i(z))), the limit of the Cesaro means.
inline Complex limit_projection_at(const HoloMap& map, const dynamics::RetractionEstimate& est,
                                   const TestFunction& f, const ComplexVec& z) {
  if (!est.converged()) throw std::invalid_argument("limit_projection: retraction estimate did not converge");
  Complex sum = 0.0;
  ComplexVec w = z;
  for (int i = 0; i < est.k; ++i) {
    if (i > 0) w = map(w);
    sum += detail::bounded_value(f, est.rho(w));
  }
  return sum / static_cast<double>(est.k);
}

inline std::vector<Complex> limit_projection(const HoloMap& map, const dynamics::RetractionEstimate& est,
                                             const TestFunction& f, const std::vector<ComplexVec>& points) {
  std::vector<Complex> out;
  out.reserve(points.size());
  for (const auto& z : points) out.push_back(limit_projection_at(map, est, f, z));
  return out;
}

inline std::vector<Complex> limit_projection(const HoloMap& map, const dynamics::RetractionEstimate& est,
                                             const TestFunction& f, const SampleGrid& grid) {
  return limit_projection(map, est, f, grid.points());
}

// ---------------------------------------------------------------------------
// Probes

struct L6Probe {
  /// min of (1 - |phi(z)|)/(1 - |z|) over sampled z with beta(z, rho(z)) >= eta
  double A_min = std::numeric_limits<double>::infinity();
  long long count = 0;
  ComplexVec argmin;
};

/// Samples L(rho, eta) = {beta(z, rho(z)) >= eta} on a near-boundary grid plus
/// volume-uniform points.
inline L6Probe lemma_l6_probe(const HoloMap& map, const dynamics::RetractionEstimate& est, double eta,
                              int samples = 512, std::uint64_t seed = kDefaultSeed) {
  if (!est.converged()) throw std::invalid_argument("lemma_l6_probe: retraction estimate did not converge");
  if (!(eta > 0.0)) throw std::invalid_argument("lemma_l6_probe: eta must be positive");
  const int n = map.dim();
  std::vector<ComplexVec> pts = ball_samples(n, samples, 1.0 - 1e-6, seed);
  for (auto& p : SampleGrid::near_boundary(n, 32, seed, 6).points()) pts.push_back(std::move(p));
  L6Probe probe;
  for (const auto& z : pts) {
    const ComplexVec r = est.rho(z);
    if (!(r.norm() < 1.0 - kBoundaryMargin)) continue;
    if (geometry::bergman_distance(z, r) < eta) continue;
    ++probe.count;
    const double a = (1.0 - map(z).norm()) / (1.0 - z.norm());
    if (a < probe.A_min) {
      probe.A_min = a;
      probe.argmin = z;
    }
  }
  return probe;
}

/// The disk map z -> phi_j^1(z, 0, ..., 0).
inline std::function<Complex(Complex)> slice_first_component(const HoloMap& map, long long j) {
  const HoloMap phij = iterate_pointwise(map, j);
  const int n = map.dim();
  return [phij, n](Complex z) {
    ComplexVec v = ComplexVec::Zero(n);
    v[0] = z;
    return phij(v)[0];
  };
}

// ---------------------------------------------------------------------------
// Classification

enum class Verdict { MeAndUme, NotMe, Undecided };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::MeAndUme: return "ME_AND_UME";
    case Verdict::NotMe: return "NOT_ME";
    default: return "UNDECIDED";
  }
}

/// Why the verdict was reached. Theorem-backed bases are marked as such; the
/// rest are numerical evidence.
enum class Basis {
  NoInteriorFixedPoint,  // theorem-backed
  CriterionHolds,
  CriterionFails,
  CriterionInconclusive,
  NoPeriodFound,
  InconsistentLimit,
};

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::NoInteriorFixedPoint: return "THEOREM_NO_INTERIOR_FIXED_POINT";
    case Basis::CriterionHolds: return "NUMERICAL_CRITERION_HOLDS";
    case Basis::CriterionFails: return "NUMERICAL_CRITERION_FAILS";
    case Basis::CriterionInconclusive: return "NUMERICAL_CRITERION_INCONCLUSIVE";
    case Basis::NoPeriodFound: return "NUMERICAL_NO_PERIOD_FOUND";
    default: return "NUMERICAL_INCONSISTENT_LIMIT";
  }
}

struct ClassifyOptions {
  dynamics::FixedPointOptions fixed_point;
  dynamics::RetractionOptions retraction;
  CriterionOptions criterion;
  dynamics::DenjoyWolffOptions denjoy_wolff;
  /// Empty means the default near-boundary radii.
  std::vector<double> grid_radii;
  int grid_directions = 32;
  int certificate_samples = 64;
  /// Radius of the grid for the Cesaro cross-check.
  double cross_check_radius = 0.9;
  std::uint64_t seed = kDefaultSeed;

  SampleGrid sup_grid(int n) const {
    return SampleGrid(grid_radii.empty() ? SampleGrid::near_boundary_radii() : grid_radii,
                      unit_directions(n, grid_directions, seed));
  }
};

struct Witness {
  std::string function;
  /// sup over the cross-check grid of |M_J f - P f|
  double sup_difference = 0.0;
  /// 2 (Lip(f) eps + 2 (k/J) sup|f|)
  double allowed = 0.0;
  bool within = false;
};

struct ErgodicityReport {
  Verdict verdict = Verdict::Undecided;
  Basis basis = Basis::CriterionInconclusive;
  int dim = 0;
  double certificate_max = 0.0;
  std::optional<ComplexVec> fixed_point;
  std::optional<dynamics::RetractionStatus> retraction_status;
  std::optional<int> k;
  std::optional<int> s;
  std::vector<dynamics::CauchyStep> retraction_trace;
  std::vector<CriterionEntry> criterion_trace;
  std::optional<CriterionOutcome> criterion_outcome;
  std::optional<long long> horizon;
  std::optional<dynamics::DenjoyWolffEstimate> denjoy_wolff;
  std::vector<Witness> witnesses;
  std::string note;
  ClassifyOptions options;
};

/// Full pipeline: certify, look for an interior fixed point, conjugate it to
/// the origin, estimate the retraction and test the sup-norm criterion.
inline ErgodicityReport classify(const HoloMap& map, const ClassifyOptions& opt = {}) {
  ErgodicityReport rep;
  rep.dim = map.dim();
  rep.options = opt;
  rep.certificate_max = certify_self_map(map, opt.certificate_samples, opt.seed).max_observed;

  rep.fixed_point = dynamics::find_interior_fixed_point(map, opt.fixed_point);
  if (!rep.fixed_point) {
    rep.verdict = Verdict::NotMe;
    rep.basis = Basis::NoInteriorFixedPoint;
    try {
      rep.denjoy_wolff = dynamics::denjoy_wolff_estimate(map, opt.denjoy_wolff);
    } catch (const dynamics::NoCommonLimit& e) {
      rep.note = e.what();
    }
    return rep;
  }

  const HoloMap psi = dynamics::conjugate_to_origin(map, *rep.fixed_point);
  dynamics::RetractionEstimate est;
  try {
    est = dynamics::estimate_retraction(psi, opt.retraction);
  } catch (const InconsistencyError& e) {
    rep.verdict = Verdict::Undecided;
    rep.basis = Basis::InconsistentLimit;
    rep.note = e.what();
    return rep;
  }
  rep.retraction_status = est.status;
  rep.retraction_trace = est.convergence_trace;
  if (!est.converged()) {
    rep.verdict = Verdict::Undecided;
    rep.basis = Basis::NoPeriodFound;
    return rep;
  }
  rep.k = est.k;
  rep.s = est.s;

  const auto crit = criterion_iii_check(psi, est, opt.sup_grid(map.dim()), opt.criterion);
  rep.criterion_trace = crit.trace;
  rep.criterion_outcome = crit.outcome;
  rep.horizon = crit.horizon;
  switch (crit.outcome) {
    case CriterionOutcome::Holds: {
      rep.verdict = Verdict::MeAndUme;
      rep.basis = Basis::CriterionHolds;
      const auto pts = SampleGrid::compact(map.dim(), opt.cross_check_radius, 4, 16, opt.seed).points();
      const double eps = crit.trace.back().value;
      const long long J = opt.criterion.budget;
      const auto battery = test_battery(map.dim());
      for (const TestFunction* f : {&battery[1], &battery.back()}) {
        Witness w{f->name, 0.0, 0.0, false};
        const auto m = cesaro_mean(psi, *f, J, pts);
        const auto p = limit_projection(psi, est, *f, pts);
        for (std::size_t i = 0; i < pts.size(); ++i) w.sup_difference = std::max(w.sup_difference, std::abs(m[i] - p[i]));
        w.allowed = 2.0 * (f->lipschitz * eps + 2.0 * (double(est.k) / double(J)) * f->bound);
        w.within = w.sup_difference <= w.allowed;
        rep.witnesses.push_back(std::move(w));
      }
      break;
    }
    case CriterionOutcome::Fails:
      rep.verdict = Verdict::NotMe;
      rep.basis = Basis::CriterionFails;
      break;
    default:
      rep.verdict = Verdict::Undecided;
      rep.basis = Basis::CriterionInconclusive;
  }
  return rep;
}

}  // namespace ballab::ergodicity
