#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <vector>

#include "ballab/core.hpp"

namespace ballab {

/// Exponent vector m = (m_1, ..., m_n) of the monomial z^m = z_1^{m_1} ... z_n^{m_n}.
using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& m) { return std::accumulate(m.begin(), m.end(), 0); }

/// Sparse polynomial in n complex variables, keyed by multi-index.
class Polynomial {
 public:
  using Terms = std::map<MultiIndex, Complex>;

  Polynomial() = default;
  explicit Polynomial(int nvars) : nvars_(nvars) {}

  static Polynomial constant(int nvars, Complex c) {
    Polynomial p(nvars);
    p.add_term(MultiIndex(nvars, 0), c);
    return p;
  }
  static Polynomial variable(int nvars, int i, Complex c = 1.0) {
    Polynomial p(nvars);
    MultiIndex m(nvars, 0);
    m[i] = 1;
    p.add_term(m, c);
    return p;
  }

  int nvars() const { return nvars_; }
  const Terms& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  void add_term(const MultiIndex& m, Complex c) {
    if (static_cast<int>(m.size()) != nvars_) {
      throw DimensionMismatch("Polynomial::add_term: multi-index has wrong length");
    }
    for (int e : m) {
      if (e < 0) throw std::invalid_argument("Polynomial::add_term: negative exponent");
    }
    if (c == Complex(0.0)) return;
    auto [it, inserted] = terms_.try_emplace(m, c);
    if (!inserted) {
      it->second += c;
      if (it->second == Complex(0.0)) terms_.erase(it);
    }
  }

  Complex coefficient(const MultiIndex& m) const {
    auto it = terms_.find(m);
    return it == terms_.end() ? Complex(0.0) : it->second;
  }

  int degree() const {
    int d = -1;
    for (const auto& [m, c] : terms_) d = std::max(d, total_degree(m));
    return d;
  }

  /// Largest exponent of variable i.
  int max_exponent(int i) const {
    int e = 0;
    for (const auto& [m, c] : terms_) e = std::max(e, m[i]);
    return e;
  }

  /// Sum of |coefficient|; bounds sup |p| on the closed unit polydisk.
  double l1_norm() const {
    double s = 0.0;
    for (const auto& [m, c] : terms_) s += std::abs(c);
    return s;
  }

  Polynomial& operator+=(const Polynomial& other) {
    for (const auto& [m, c] : other.terms_) add_term(m, c);
    return *this;
  }

  Polynomial scaled(Complex s) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) out.add_term(m, s * c);
    return out;
  }

  /// Terms of total degree exactly k.
  Polynomial homogeneous_part(int k) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) {
      if (total_degree(m) == k) out.terms_.emplace(m, c);
    }
    return out;
  }

  /// d/dz_i, exact term by term.
  Polynomial derivative(int i) const {
    Polynomial out(nvars_);
    for (const auto& [m, c] : terms_) {
      if (m[i] == 0) continue;
      MultiIndex d = m;
      d[i] -= 1;
      out.add_term(d, c * static_cast<double>(m[i]));
    }
    return out;
  }

  /// Evaluate using a precomputed power table: powers[i][e] = z_i^e.
  Complex evaluate(const std::vector<std::vector<Complex>>& powers) const {
    Complex acc = 0.0;
    for (const auto& [m, c] : terms_) {
      Complex t = c;
      for (int i = 0; i < nvars_; ++i) {
        if (m[i] != 0) t *= powers[i][m[i]];
      }
      acc += t;
    }
    return acc;
  }

  Complex evaluate(const ComplexVec& z) const {
    require_dim(z);
    std::vector<std::vector<Complex>> powers(nvars_);
    for (int i = 0; i < nvars_; ++i) powers[i] = power_table(z[i], max_exponent(i));
    return evaluate(powers);
  }

  static std::vector<Complex> power_table(Complex x, int max_exp) {
    std::vector<Complex> t(static_cast<std::size_t>(max_exp) + 1);
    t[0] = 1.0;
    for (int e = 1; e <= max_exp; ++e) t[e] = t[e - 1] * x;
    return t;
  }

 private:
  void require_dim(const ComplexVec& z) const {
    if (z.size() != nvars_) throw DimensionMismatch("Polynomial::evaluate: dimension mismatch");
  }

  int nvars_ = 0;
  Terms terms_;
};

/// Product truncated at total degree `max_degree`. Sets `truncated` when any
/// term of the exact product was dropped.
inline Polynomial multiply_truncated(const Polynomial& a, const Polynomial& b, int max_degree,
                                     bool& truncated) {
  if (a.nvars() != b.nvars()) throw DimensionMismatch("multiply_truncated: dimension mismatch");
  const int n = a.nvars();
  Polynomial out(n);
  MultiIndex m(n);
  for (const auto& [ma, ca] : a.terms()) {
    const int da = total_degree(ma);
    for (const auto& [mb, cb] : b.terms()) {
      if (da + total_degree(mb) > max_degree) {
        truncated = true;
        continue;
      }
      for (int i = 0; i < n; ++i) m[i] = ma[i] + mb[i];
      out.add_term(m, ca * cb);
    }
  }
  return out;
}

}  // namespace ballab
