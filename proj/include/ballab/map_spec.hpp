#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ballab/ergodicity.hpp"
#include "ballab/holomap.hpp"

/// Text format for map definitions:
///
///   # comment
///   dim 2
///   degree 16
///   kind series            (series | linear | automorphism)
///   1: 1 0: 0.5 0          series term: component, exponents, coefficient
///   matrix 1 2: 0.5 0      linear entry (row, column), 1-based
///   center: 0.1 0 0 0.2    automorphism center as re im pairs
///   unitary 1 1: 1 0       automorphism unitary entry; identity if absent
///   set budget 512         analysis override
namespace ballab {

struct MapSpec {
  HoloMap map;
  std::string kind;
  std::vector<std::pair<std::string, std::string>> overrides;
};

namespace spec_detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace spec_detail

inline double parse_double(const std::string& tok, const std::string& what) {
  double v = 0.0;
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(what + ": expected a finite number, got '" + tok + "'");
  }
  return v;
}

inline long long parse_integer(const std::string& tok, const std::string& what) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(what + ": expected an integer, got '" + tok + "'");
  }
  return v;
}

/// Comma-separated radii, e.g. "0.5,0.9,0.999".
inline std::vector<double> parse_radii(const std::string& text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) out.push_back(parse_double(spec_detail::trim(item), "grid radii"));
  if (out.empty()) throw ParseError("grid radii: empty list");
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] > 0.0 && out[i] < 1.0)) throw ParseError("grid radii: values must lie in (0, 1)");
    if (i > 0 && !(out[i] > out[i - 1])) throw ParseError("grid radii: values must be strictly increasing");
  }
  return out;
}

inline const std::vector<std::string>& override_keys() {
  static const std::vector<std::string> keys = {
      "budget",         "kmax",         "seed",           "grid_directions",     "grid_radii",
      "decay_threshold", "nondecay_factor", "monotone_slack", "cauchy_tolerance", "certificate_samples"};
  return keys;
}

/// Applies `set` lines from a spec file to the analysis options.
inline void apply_overrides(const std::vector<std::pair<std::string, std::string>>& overrides,
                            ergodicity::ClassifyOptions& opt) {
  auto positive = [](long long v, const std::string& key) {
    if (v < 1) throw ParseError("set " + key + ": must be positive");
    return v;
  };
  for (const auto& [key, value] : overrides) {
    const std::string what = "set " + key;
    if (key == "budget") {
      opt.criterion.budget = positive(parse_integer(value, what), key);
    } else if (key == "kmax") {
      opt.retraction.kmax = static_cast<int>(positive(parse_integer(value, what), key));
    } else if (key == "seed") {
      const long long s = parse_integer(value, what);
      if (s < 0) throw ParseError(what + ": must be non-negative");
      opt.seed = opt.fixed_point.seed = opt.retraction.seed = static_cast<std::uint64_t>(s);
    } else if (key == "grid_directions") {
      opt.grid_directions = static_cast<int>(positive(parse_integer(value, what), key));
    } else if (key == "grid_radii") {
      opt.grid_radii = parse_radii(value);
    } else if (key == "decay_threshold") {
      opt.criterion.decay_threshold = parse_double(value, what);
    } else if (key == "nondecay_factor") {
      opt.criterion.nondecay_factor = parse_double(value, what);
    } else if (key == "monotone_slack") {
      opt.criterion.monotone_slack = parse_double(value, what);
    } else if (key == "cauchy_tolerance") {
      opt.retraction.cauchy_tolerance = parse_double(value, what);
    } else if (key == "certificate_samples") {
      opt.certificate_samples = static_cast<int>(positive(parse_integer(value, what), key));
    } else {
      throw ParseError("unknown override '" + key + "'");
    }
  }
}

/// Parses a map definition. `degree_bound_override` > 0 replaces the file's
/// degree line.
inline MapSpec parse_map_spec(std::istream& in, int degree_bound_override = 0) {
  using spec_detail::split_ws;
  using spec_detail::trim;
  int dim = 0;
  int degree = kDefaultDegreeBound;
  std::string kind;
  struct Term {
    int component;
    MultiIndex m;
    Complex c;
    int line;
  };
  std::vector<Term> terms;
  std::map<std::pair<int, int>, Complex> matrix, unitary;
  std::vector<double> center;
  bool have_center = false;
  MapSpec spec;

  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> ParseError {
    return ParseError("line " + std::to_string(lineno) + ": " + msg);
  };
  auto complex_pair = [&](const std::string& text, const std::string& what) {
    auto toks = split_ws(text);
    if (toks.size() != 2) throw fail(what + ": expected 're im'");
    try {
      return Complex(parse_double(toks[0], what), parse_double(toks[1], what));
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
  };
  auto index_pair = [&](const std::string& text, const std::string& what) {
    auto toks = split_ws(text);
    if (toks.size() != 3) throw fail(what + ": expected '" + what + " i l: re im'");
    std::pair<int, int> ij;
    try {
      ij = {static_cast<int>(parse_integer(toks[1], what)), static_cast<int>(parse_integer(toks[2], what))};
    } catch (const ParseError& e) {
      throw fail(e.what());
    }
    if (dim == 0) throw fail("'dim' must precede " + what + " entries");
    if (ij.first < 1 || ij.first > dim || ij.second < 1 || ij.second > dim) throw fail(what + ": index out of range");
    return ij;
  };

  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto toks = split_ws(line);
    const std::string& head = toks[0];

    if (head == "dim" || head == "degree") {
      if (toks.size() != 2) throw fail("expected '" + head + " <integer>'");
      long long v;
      try {
        v = parse_integer(toks[1], head);
      } catch (const ParseError& e) {
        throw fail(e.what());
      }
      if (v < 1 || v > 64) throw fail(head + " must be between 1 and 64");
      (head == "dim" ? dim : degree) = static_cast<int>(v);
    } else if (head == "kind") {
      if (toks.size() != 2 || (toks[1] != "series" && toks[1] != "linear" && toks[1] != "automorphism")) {
        throw fail("kind must be series, linear or automorphism");
      }
      kind = toks[1];
    } else if (head == "set") {
      if (toks.size() < 3) throw fail("expected 'set <key> <value>'");
      const auto& keys = override_keys();
      if (std::find(keys.begin(), keys.end(), toks[1]) == keys.end()) throw fail("unknown override '" + toks[1] + "'");
      std::string value = toks[2];
      for (std::size_t i = 3; i < toks.size(); ++i) value += toks[i];
      spec.overrides.emplace_back(toks[1], value);
    } else {
      const auto colon = line.find(':');
      if (colon == std::string::npos) throw fail("unrecognized line '" + line + "'");
      const std::string left = trim(line.substr(0, colon));
      const std::string rest = line.substr(colon + 1);
      const auto ltoks = split_ws(left);
      if (ltoks.empty()) throw fail("missing entry label");
      if (ltoks[0] == "matrix" || ltoks[0] == "unitary") {
        auto ij = index_pair(left, ltoks[0]);
        (ltoks[0] == "matrix" ? matrix : unitary)[ij] = complex_pair(rest, ltoks[0]);
      } else if (ltoks[0] == "center") {
        if (ltoks.size() != 1) throw fail("expected 'center: re im ...'");
        for (const auto& t : split_ws(rest)) {
          try {
            center.push_back(parse_double(t, "center"));
          } catch (const ParseError& e) {
            throw fail(e.what());
          }
        }
        have_center = true;
      } else {
        // series term "i: m1 ... mn: re im"
        if (ltoks.size() != 1) throw fail("unrecognized line '" + line + "'");
        const auto colon2 = rest.find(':');
        if (colon2 == std::string::npos) throw fail("series term needs 'i: m1 ... mn: re im'");
        if (dim == 0) throw fail("'dim' must precede series terms");
        Term t{};
        t.line = lineno;
        try {
          t.component = static_cast<int>(parse_integer(ltoks[0], "component"));
          for (const auto& e : split_ws(rest.substr(0, colon2))) {
            const long long v = parse_integer(e, "exponent");
            if (v < 0) throw ParseError("exponent must be non-negative");
            t.m.push_back(static_cast<int>(v));
          }
        } catch (const ParseError& e) {
          throw fail(e.what());
        }
        if (t.component < 1 || t.component > dim) throw fail("component index out of range");
        if (static_cast<int>(t.m.size()) != dim) {
          throw fail("expected " + std::to_string(dim) + " exponents, got " + std::to_string(t.m.size()));
        }
        t.c = complex_pair(rest.substr(colon2 + 1), "coefficient");
        terms.push_back(std::move(t));
      }
    }
  }

  lineno = 0;
  if (dim == 0) throw fail("missing 'dim'");
  {
    ergodicity::ClassifyOptions probe;
    apply_overrides(spec.overrides, probe);
  }
  if (kind.empty()) kind = "series";
  if (degree_bound_override > 0) degree = degree_bound_override;
  spec.kind = kind;
  auto reject_other = [&](bool bad, const char* what) {
    if (bad) throw fail(std::string(what) + " entries are not allowed for kind " + kind);
  };

  if (kind == "series") {
    reject_other(!matrix.empty() || !unitary.empty() || have_center, "matrix/unitary/center");
    std::vector<Polynomial> comps(static_cast<std::size_t>(dim), Polynomial(dim));
    for (const auto& t : terms) {
      if (total_degree(t.m) > degree) {
        lineno = t.line;
        throw fail("term of degree " + std::to_string(total_degree(t.m)) + " exceeds degree bound " +
                   std::to_string(degree));
      }
      comps[static_cast<std::size_t>(t.component - 1)].add_term(t.m, t.c);
    }
    spec.map = HoloMap::power_series(dim, std::move(comps), degree);
  } else if (kind == "linear") {
    reject_other(!terms.empty() || !unitary.empty() || have_center, "series/unitary/center");
    ComplexMat a = ComplexMat::Zero(dim, dim);
    for (const auto& [ij, c] : matrix) a(ij.first - 1, ij.second - 1) = c;
    spec.map = HoloMap::linear(std::move(a), degree);
  } else {
    reject_other(!terms.empty() || !matrix.empty(), "series/matrix");
    if (!have_center) throw fail("automorphism needs a 'center:' line");
    if (static_cast<int>(center.size()) != 2 * dim) {
      throw fail("center needs " + std::to_string(2 * dim) + " numbers (re im per coordinate)");
    }
    ComplexVec a(dim);
    for (int i = 0; i < dim; ++i) a[i] = Complex(center[2 * i], center[2 * i + 1]);
    if (!(a.norm() < 1.0)) throw fail("automorphism center must lie inside the ball");
    ComplexMat u = ComplexMat::Identity(dim, dim);
    if (!unitary.empty()) {
      u.setZero();
      for (const auto& [ij, c] : unitary) u(ij.first - 1, ij.second - 1) = c;
    }
    try {
      spec.map = HoloMap::automorphism(a, u);
    } catch (const std::logic_error& e) {
      throw fail(e.what());
    }
  }
  return spec;
}

inline MapSpec parse_map_spec_string(const std::string& text, int degree_bound_override = 0) {
  std::istringstream in(text);
  return parse_map_spec(in, degree_bound_override);
}

inline MapSpec load_map_spec(const std::string& path, int degree_bound_override = 0) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open map file '" + path + "'");
  return parse_map_spec(in, degree_bound_override);
}

}  // namespace ballab
