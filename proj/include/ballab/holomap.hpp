#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ballab/ball_geometry.hpp"
#include "ballab/core.hpp"
#include "ballab/polynomial.hpp"
#include "ballab/quasi_random.hpp"

namespace ballab {

inline constexpr int kDefaultDegreeBound = 16;

/// A holomorphic map B_n -> C^n.
///
/// Four representations share one value type:
///  - PowerSeries: one sparse polynomial per component, truncated at a degree bound;
///  - Linear: an n x n matrix;
///  - Automorphism: z -> U phi_a(z) for a center a and a unitary U;
///  - Composite: a chain of maps applied in order, optionally repeated. This is
///    the pointwise cascade used for iterates whose series would overflow.
///
/// HoloMap is immutable and cheap to copy.
class HoloMap {
 public:
  enum class Kind { PowerSeries, Linear, Automorphism, Composite };

  HoloMap() = default;

  static HoloMap power_series(int dim, std::vector<Polynomial> components,
                              int degree_bound = kDefaultDegreeBound) {
    if (dim < 1) throw std::invalid_argument("HoloMap: dimension must be positive");
    if (static_cast<int>(components.size()) != dim) {
      throw DimensionMismatch("HoloMap::power_series: need one polynomial per component");
    }
    auto d = std::make_shared<Data>();
    d->kind = Kind::PowerSeries;
    d->dim = dim;
    d->degree_bound = degree_bound;
    for (auto& p : components) {
      if (p.nvars() != dim) throw DimensionMismatch("HoloMap::power_series: polynomial arity");
      if (p.degree() > degree_bound) {
        throw DegreeOverflow("HoloMap::power_series: term of degree " + std::to_string(p.degree()) +
                             " exceeds degree bound " + std::to_string(degree_bound));
      }
    }
    d->components = std::move(components);
    d->max_exp.assign(dim, 0);
    for (const auto& p : d->components) {
      for (int i = 0; i < dim; ++i) d->max_exp[i] = std::max(d->max_exp[i], p.max_exponent(i));
    }
    d->partials.resize(static_cast<std::size_t>(dim) * dim);
    for (int i = 0; i < dim; ++i) {
      for (int l = 0; l < dim; ++l) d->partials[i * dim + l] = d->components[i].derivative(l);
    }
    return HoloMap(std::move(d));
  }

  static HoloMap linear(ComplexMat a, int degree_bound = kDefaultDegreeBound) {
    if (a.rows() != a.cols() || a.rows() < 1) {
      throw DimensionMismatch("HoloMap::linear: matrix must be square and non-empty");
    }
    auto d = std::make_shared<Data>();
    d->kind = Kind::Linear;
    d->dim = static_cast<int>(a.rows());
    d->degree_bound = degree_bound;
    d->matrix = std::move(a);
    return HoloMap(std::move(d));
  }

  static HoloMap identity(int n) { return linear(ComplexMat::Identity(n, n)); }

  /// z -> U phi_a(z).
  static HoloMap automorphism(ComplexVec center, ComplexMat unitary) {
    require_interior(center, "HoloMap::automorphism");
    const auto n = center.size();
    if (unitary.rows() != n || unitary.cols() != n) {
      throw DimensionMismatch("HoloMap::automorphism: unitary factor has wrong shape");
    }
    if (!(unitary.adjoint() * unitary).isIdentity(1e-10)) {
      throw DomainError("HoloMap::automorphism: factor is not unitary");
    }
    auto d = std::make_shared<Data>();
    d->kind = Kind::Automorphism;
    d->dim = static_cast<int>(n);
    d->center = std::move(center);
    d->matrix = std::move(unitary);
    return HoloMap(std::move(d));
  }

  static HoloMap automorphism(ComplexVec center) {
    const auto n = center.size();
    return automorphism(std::move(center), ComplexMat::Identity(n, n));
  }

  /// Applies stages[0], then stages[1], ... Nested single-pass chains are flattened.
  static HoloMap chain(const std::vector<HoloMap>& stages) {
    if (stages.empty()) throw std::invalid_argument("HoloMap::chain: no stages");
    auto d = std::make_shared<Data>();
    d->kind = Kind::Composite;
    d->dim = stages.front().dim();
    d->degree_bound = 0;
    for (const auto& s : stages) {
      if (s.dim() != d->dim) throw DimensionMismatch("HoloMap::chain: stage dimensions differ");
      d->degree_bound = std::max(d->degree_bound, s.degree_bound());
      if (s.kind() == Kind::Composite && s.repetitions() == 1) {
        for (const auto& inner : s.stages()) d->stages.push_back(inner);
      } else {
        d->stages.push_back(s);
      }
    }
    return HoloMap(std::move(d));
  }

  /// `base` applied `count` times, evaluated pointwise.
  static HoloMap repeated(const HoloMap& base, long long count) {
    if (count < 1) throw std::invalid_argument("HoloMap::repeated: count must be positive");
    auto d = std::make_shared<Data>();
    d->kind = Kind::Composite;
    d->dim = base.dim();
    d->degree_bound = base.degree_bound();
    if (base.kind() == Kind::Composite && base.repetitions() > 1 &&
        base.stages().size() == 1) {
      d->stages = base.stages();
      d->repetitions = base.repetitions() * count;
    } else {
      d->stages = {base};
      d->repetitions = count;
    }
    return HoloMap(std::move(d));
  }

  bool valid() const { return d_ != nullptr; }
  Kind kind() const { return data().kind; }
  int dim() const { return d_ ? d_->dim : 0; }
  int degree_bound() const { return data().degree_bound; }

  /// PowerSeries and Linear maps carry explicit coefficients.
  bool is_series() const { return kind() == Kind::PowerSeries || kind() == Kind::Linear; }

  /// True when the map is a finite polynomial, so evaluation on the closed ball is allowed.
  bool is_polynomial() const {
    if (is_series()) return true;
    if (kind() == Kind::Automorphism) return false;
    for (const auto& s : stages()) {
      if (!s.is_polynomial()) return false;
    }
    return true;
  }

  const ComplexMat& matrix() const {
    if (kind() != Kind::Linear && kind() != Kind::Automorphism) {
      throw std::logic_error("HoloMap::matrix: map has no matrix");
    }
    return data().matrix;
  }
  const ComplexVec& center() const {
    if (kind() != Kind::Automorphism) throw std::logic_error("HoloMap::center: not an automorphism");
    return data().center;
  }
  const std::vector<HoloMap>& stages() const { return data().stages; }
  long long repetitions() const { return data().repetitions; }

  /// Coefficients per component. Linear maps are expanded to degree-1 polynomials.
  std::vector<Polynomial> series_components() const {
    if (kind() == Kind::PowerSeries) return data().components;
    if (kind() == Kind::Linear) {
      const int n = dim();
      std::vector<Polynomial> out(n, Polynomial(n));
      for (int i = 0; i < n; ++i) {
        for (int l = 0; l < n; ++l) {
          MultiIndex m(n, 0);
          m[l] = 1;
          out[i].add_term(m, data().matrix(i, l));
        }
      }
      return out;
    }
    throw std::logic_error("HoloMap::series_components: map has no explicit series");
  }

  ComplexVec operator()(const ComplexVec& z) const {
    check_argument(z, "evaluate");
    return apply(z);
  }

  /// d_z phi, the n x n matrix of partial derivatives.
  ComplexMat jacobian(const ComplexVec& z) const {
    check_argument(z, "jacobian");
    return apply_jacobian(z);
  }

 private:
  struct Data {
    Kind kind = Kind::PowerSeries;
    int dim = 0;
    int degree_bound = kDefaultDegreeBound;
    std::vector<Polynomial> components;
    std::vector<int> max_exp;
    std::vector<Polynomial> partials;  // row-major d phi^i / d z_l
    ComplexMat matrix;
    ComplexVec center;
    std::vector<HoloMap> stages;
    long long repetitions = 1;
  };

  explicit HoloMap(std::shared_ptr<const Data> d) : d_(std::move(d)) {}

  const Data& data() const {
    if (!d_) throw std::logic_error("HoloMap: use of an empty map");
    return *d_;
  }

  void check_argument(const ComplexVec& z, const char* what) const {
    if (z.size() != dim()) {
      throw DimensionMismatch(std::string("HoloMap::") + what + ": dimension mismatch");
    }
    if (is_polynomial()) {
      if (!all_finite(z) || !(z.norm() <= 1.0 + 1e-12)) {
        throw DomainError(std::string("HoloMap::") + what + ": point outside the closed unit ball");
      }
    } else {
      require_interior(z, what);
    }
  }

  std::vector<std::vector<Complex>> power_tables(const ComplexVec& z) const {
    const auto& d = data();
    std::vector<std::vector<Complex>> powers(d.dim);
    for (int i = 0; i < d.dim; ++i) powers[i] = Polynomial::power_table(z[i], d.max_exp[i]);
    return powers;
  }

  ComplexVec apply(const ComplexVec& z) const {
    const auto& d = data();
    switch (d.kind) {
      case Kind::Linear:
        return d.matrix * z;
      case Kind::PowerSeries: {
        auto powers = power_tables(z);
        ComplexVec out(d.dim);
        for (int i = 0; i < d.dim; ++i) out[i] = d.components[i].evaluate(powers);
        return out;
      }
      case Kind::Automorphism:
        return d.matrix * geometry::involution(d.center, z);
      case Kind::Composite: {
        ComplexVec x = z;
        for (long long r = 0; r < d.repetitions; ++r) {
          for (const auto& s : d.stages) x = s(x);
        }
        return x;
      }
    }
    throw std::logic_error("HoloMap: unknown kind");
  }

  ComplexMat apply_jacobian(const ComplexVec& z) const {
    const auto& d = data();
    const int n = d.dim;
    switch (d.kind) {
      case Kind::Linear:
        return d.matrix;
      case Kind::PowerSeries: {
        auto powers = power_tables(z);
        ComplexMat j(n, n);
        for (int i = 0; i < n; ++i) {
          for (int l = 0; l < n; ++l) j(i, l) = d.partials[i * n + l].evaluate(powers);
        }
        return j;
      }
      case Kind::Automorphism: {
        // phi = U N / D with N = a - M z, D = 1 - <z, a>, M = P_a + s_a Q_a.
        const ComplexVec& a = d.center;
        const double a2 = a.squaredNorm();
        if (a2 == 0.0) return -d.matrix;
        const double sa = std::sqrt(1.0 - a2);
        const ComplexMat M = sa * ComplexMat::Identity(n, n) + ((1.0 - sa) / a2) * (a * a.adjoint());
        const Complex D = 1.0 - inner(z, a);
        const ComplexVec N = a - M * z;
        return d.matrix * (-M / D + (N * a.adjoint()) / (D * D));
      }
      case Kind::Composite: {
        ComplexMat j = ComplexMat::Identity(n, n);
        ComplexVec x = z;
        for (long long r = 0; r < d.repetitions; ++r) {
          for (const auto& s : d.stages) {
            j = s.jacobian(x) * j;
            x = s(x);
          }
        }
        return j;
      }
    }
    throw std::logic_error("HoloMap: unknown kind");
  }

  std::shared_ptr<const Data> d_;
};

inline ComplexVec evaluate(const HoloMap& map, const ComplexVec& z) { return map(z); }

inline ComplexMat jacobian(const HoloMap& map, const ComplexVec& z) { return map.jacobian(z); }

// ---------------------------------------------------------------------------
// Series algebra

/// Result of a series operation that may have dropped terms above the degree bound.
struct SeriesResult {
  std::vector<Polynomial> components;
  bool truncated = false;
  /// Upper bound on sup over the closed ball of the dropped tail (Euclidean norm).
  double truncation_loss = 0.0;
};

/// outer o inner for explicit series, keeping total degree <= max_degree.
///
/// Degrees never decrease under multiplication, so every kept coefficient is
/// exact; the dropped tail is bounded through the l1 norms of the factors.
inline SeriesResult compose_series(const std::vector<Polynomial>& outer,
                                   const std::vector<Polynomial>& inner, int max_degree) {
  const int n = static_cast<int>(inner.size());
  SeriesResult res;
  std::vector<int> need(n, 0);
  for (const auto& p : outer) {
    if (p.nvars() != n) throw DimensionMismatch("compose_series: arity mismatch");
    for (int i = 0; i < n; ++i) need[i] = std::max(need[i], p.max_exponent(i));
  }
  std::vector<std::vector<Polynomial>> pw(n);
  std::vector<double> inner_l1(n);
  for (int i = 0; i < n; ++i) {
    inner_l1[i] = inner[i].l1_norm();
    pw[i].push_back(Polynomial::constant(n, 1.0));
    for (int e = 1; e <= need[i]; ++e) {
      pw[i].push_back(multiply_truncated(pw[i][e - 1], inner[i], max_degree, res.truncated));
    }
  }
  double loss2 = 0.0;
  for (const auto& p : outer) {
    Polynomial acc(n);
    double bound = 0.0;
    for (const auto& [m, c] : p.terms()) {
      Polynomial term = Polynomial::constant(n, c);
      double b = std::abs(c);
      for (int i = 0; i < n; ++i) {
        if (m[i] == 0) continue;
        term = multiply_truncated(term, pw[i][m[i]], max_degree, res.truncated);
        b *= std::pow(inner_l1[i], m[i]);
      }
      acc += term;
      bound += b;
    }
    const double tail = std::max(0.0, bound - acc.l1_norm());
    loss2 += tail * tail;
    res.components.push_back(std::move(acc));
  }
  res.truncation_loss = res.truncated ? std::sqrt(loss2) : 0.0;
  return res;
}

/// Taylor expansion of any map up to total degree `max_degree`.
inline SeriesResult to_series(const HoloMap& map, int max_degree) {
  const int n = map.dim();
  switch (map.kind()) {
    case HoloMap::Kind::PowerSeries:
    case HoloMap::Kind::Linear: {
      SeriesResult r;
      for (auto& p : map.series_components()) {
        if (p.degree() <= max_degree) {
          r.components.push_back(std::move(p));
          continue;
        }
        Polynomial kept(n);
        double dropped = 0.0;
        for (const auto& [m, c] : p.terms()) {
          if (total_degree(m) <= max_degree) {
            kept.add_term(m, c);
          } else {
            dropped += std::abs(c);
          }
        }
        r.truncated = true;
        r.truncation_loss = std::hypot(r.truncation_loss, dropped);
        r.components.push_back(std::move(kept));
      }
      return r;
    }
    case HoloMap::Kind::Automorphism: {
      // U (a - M z) * sum_k <z, a>^k, the geometric series of 1 / (1 - <z, a>).
      const ComplexVec& a = map.center();
      const ComplexMat& U = map.matrix();
      const double a2 = a.squaredNorm();
      SeriesResult r;
      if (a2 == 0.0) {
        r.components = HoloMap::linear(-U).series_components();
        return r;
      }
      const double sa = std::sqrt(1.0 - a2);
      const ComplexMat M = sa * ComplexMat::Identity(n, n) + ((1.0 - sa) / a2) * (a * a.adjoint());
      Polynomial za(n);  // <z, a> = sum z_i conj(a_i)
      for (int i = 0; i < n; ++i) za += Polynomial::variable(n, i, std::conj(a[i]));
      Polynomial geom = Polynomial::constant(n, 1.0);
      Polynomial pw = Polynomial::constant(n, 1.0);
      for (int k = 1; k <= max_degree; ++k) {
        pw = multiply_truncated(pw, za, max_degree, r.truncated);
        geom += pw;
      }
      std::vector<Polynomial> numer(n, Polynomial(n));
      for (int i = 0; i < n; ++i) {
        numer[i] += Polynomial::constant(n, a[i]);
        for (int l = 0; l < n; ++l) numer[i] += Polynomial::variable(n, l, -M(i, l));
      }
      for (int i = 0; i < n; ++i) {
        Polynomial comp(n);
        for (int l = 0; l < n; ++l) {
          if (U(i, l) == Complex(0.0)) continue;
          comp += multiply_truncated(numer[l], geom, max_degree, r.truncated).scaled(U(i, l));
        }
        r.components.push_back(std::move(comp));
      }
      // Geometric tail |a|^{D+1} / (1 - |a|) times |N| <= 2, plus the dropped
      // degree D + 1 piece of M z <z,a>^D.
      const double an = std::sqrt(a2);
      r.truncated = true;
      r.truncation_loss = 2.0 * std::pow(an, max_degree + 1) / (1.0 - an) + std::pow(an, max_degree);
      return r;
    }
    case HoloMap::Kind::Composite: {
      SeriesResult acc;
      acc.components = HoloMap::identity(n).series_components();
      for (long long rep = 0; rep < map.repetitions(); ++rep) {
        for (const auto& s : map.stages()) {
          SeriesResult stage = to_series(s, max_degree);
          SeriesResult next = compose_series(stage.components, acc.components, max_degree);
          acc.truncated = acc.truncated || stage.truncated || next.truncated;
          acc.truncation_loss += stage.truncation_loss + next.truncation_loss;
          acc.components = std::move(next.components);
        }
      }
      // Propagated losses are only heuristic once stages are non-linear.
      return acc;
    }
  }
  throw std::logic_error("to_series: unknown kind");
}

struct ComposeResult {
  HoloMap map;
  bool truncated = false;
  double truncation_loss = 0.0;
};

/// outer o inner. Explicit series are composed symbolically and truncated at
/// the larger degree bound, with the loss reported; closed forms compose exactly
/// as a pointwise chain.
inline ComposeResult compose(const HoloMap& outer, const HoloMap& inner) {
  if (outer.dim() != inner.dim()) throw DimensionMismatch("compose: dimension mismatch");
  const int bound = std::max(outer.degree_bound(), inner.degree_bound());
  if (outer.kind() == HoloMap::Kind::Linear && inner.kind() == HoloMap::Kind::Linear) {
    return {HoloMap::linear(outer.matrix() * inner.matrix(), bound), false, 0.0};
  }
  if (outer.is_series() && inner.is_series()) {
    SeriesResult s = compose_series(outer.series_components(), inner.series_components(), bound);
    return {HoloMap::power_series(outer.dim(), std::move(s.components), bound), s.truncated,
            s.truncation_loss};
  }
  return {HoloMap::chain({inner, outer}), false, 0.0};
}

/// Symbolic iterate phi_j by binary splitting (phi_{2m} = phi_m o phi_m).
/// Throws DegreeOverflow when a non-linear series would be truncated; use
/// iterate_pointwise for those. Closed-form kinds iterate pointwise exactly.
inline HoloMap iterate(const HoloMap& map, long long j) {
  if (j < 1) throw std::invalid_argument("iterate: j must be positive");
  if (map.kind() == HoloMap::Kind::Linear) {
    ComplexMat result = ComplexMat::Identity(map.dim(), map.dim());
    ComplexMat base = map.matrix();
    for (long long e = j; e > 0; e >>= 1) {
      if (e & 1) result = base * result;
      if (e > 1) base = base * base;
    }
    return HoloMap::linear(std::move(result), map.degree_bound());
  }
  if (!map.is_series()) return HoloMap::repeated(map, j);
  std::optional<HoloMap> result;
  HoloMap base = map;
  for (long long e = j; e > 0; e >>= 1) {
    if (e & 1) {
      if (result) {
        auto c = compose(base, *result);
        if (c.truncated) {
          throw DegreeOverflow("iterate: degree bound exceeded at j = " + std::to_string(j) +
                               "; use iterate_pointwise");
        }
        result = c.map;
      } else {
        result = base;
      }
    }
    if (e > 1) {
      auto c = compose(base, base);
      if (c.truncated) {
        throw DegreeOverflow("iterate: degree bound exceeded at j = " + std::to_string(j) +
                             "; use iterate_pointwise");
      }
      base = c.map;
    }
  }
  return *result;
}

/// phi_j as a pointwise cascade; never truncates.
inline HoloMap iterate_pointwise(const HoloMap& map, long long j) {
  if (j < 1) throw std::invalid_argument("iterate_pointwise: j must be positive");
  if (map.kind() == HoloMap::Kind::Linear) return iterate(map, j);
  return HoloMap::repeated(map, j);
}

/// F_k: the degree-k homogeneous piece of a map.
struct HomogeneousPart {
  int degree = 0;
  std::vector<Polynomial> components;

  ComplexVec operator()(const ComplexVec& z) const {
    ComplexVec out(static_cast<Eigen::Index>(components.size()));
    for (std::size_t i = 0; i < components.size(); ++i) {
      out[static_cast<Eigen::Index>(i)] = components[i].evaluate(z);
    }
    return out;
  }
};

/// Homogeneous expansion, in increasing degree. Closed forms are expanded to
/// the map's degree bound first.
inline std::vector<HomogeneousPart> homogeneous_parts(const HoloMap& map) {
  const auto comps = map.is_series() ? map.series_components()
                                     : to_series(map, map.degree_bound()).components;
  int max_deg = -1;
  for (const auto& p : comps) max_deg = std::max(max_deg, p.degree());
  std::vector<HomogeneousPart> parts;
  for (int k = 0; k <= max_deg; ++k) {
    HomogeneousPart part{k, {}};
    bool any = false;
    for (const auto& p : comps) {
      part.components.push_back(p.homogeneous_part(k));
      any = any || !part.components.back().empty();
    }
    if (any) parts.push_back(std::move(part));
  }
  return parts;
}

// ---------------------------------------------------------------------------
// Self-map certification

struct SelfMapCertificate {
  bool granted = false;
  /// max_observed <= 1 - 1e-12.
  bool strict = false;
  double max_observed = 0.0;
  std::vector<double> radii_used;
  ComplexVec witness;        // sample attaining max_observed
  ComplexVec witness_image;  // map(witness)
  std::string refusal;       // empty when granted
};

/// Sampled estimate of sup |map(z)|. Evidence, not a proof.
inline SelfMapCertificate is_self_map_estimate(const HoloMap& map, int samples,
                                               std::uint64_t seed = kDefaultSeed) {
  if (samples < 1) throw std::invalid_argument("is_self_map_estimate: samples must be positive");
  const int n = map.dim();
  SelfMapCertificate cert;
  for (int i = 1; i <= 9; ++i) cert.radii_used.push_back(0.1 * i);
  for (int m = 2; m <= 8; ++m) cert.radii_used.push_back(1.0 - std::pow(10.0, -m));
  // Polynomials extend to the closed ball, where boundary-touching maps attain 1.
  if (map.is_polynomial()) cert.radii_used.push_back(1.0);
  auto dirs = unit_directions(n, samples, seed);

  auto consider = [&](const ComplexVec& z) -> bool {
    ComplexVec w;
    try {
      w = map(z);
    } catch (const DomainError& e) {
      cert.witness = z;
      cert.witness_image = ComplexVec();
      cert.refusal = std::string("evaluation left the domain: ") + e.what();
      return false;
    }
    const double v = all_finite(w) ? w.norm() : std::numeric_limits<double>::infinity();
    if (v > cert.max_observed || cert.witness.size() == 0) {
      cert.max_observed = v;
      cert.witness = z;
      cert.witness_image = w;
    }
    return true;
  };

  bool ok = consider(ComplexVec::Zero(n));
  for (double r : cert.radii_used) {
    for (const auto& u : dirs) {
      if (!ok) break;
      ok = consider(r * u);
    }
  }
  if (ok && !(cert.max_observed <= 1.0 + 1e-9)) {
    ok = false;
    cert.refusal = "sampled |phi(z)| = " + std::to_string(cert.max_observed) + " exceeds 1";
  }
  cert.granted = ok;
  cert.strict = ok && cert.max_observed <= 1.0 - 1e-12;
  return cert;
}

/// Throws CertificationError with the violating sample when refused.
inline SelfMapCertificate certify_self_map(const HoloMap& map, int samples = 64,
                                           std::uint64_t seed = kDefaultSeed) {
  auto cert = is_self_map_estimate(map, samples, seed);
  if (!cert.granted) throw CertificationError("not a self-map of the ball: " + cert.refusal);
  return cert;
}

}  // namespace ballab
