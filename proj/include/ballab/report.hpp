#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ballab/dynamics.hpp"
#include "ballab/ergodicity.hpp"

/// Deterministic report documents. Floats carry 12 significant digits and must
/// be finite; the key/value form flattens the JSON tree with dotted paths.
namespace ballab::report {

using Json = nlohmann::ordered_json;

inline constexpr int kSignificantDigits = 12;

inline std::string format_number(double v) {
  if (!std::isfinite(v)) throw NumericError("report: non-finite value");
  if (v == 0.0) v = 0.0;  // drop the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", kSignificantDigits, v);
  return buf;
}

/// v rounded to 12 significant digits.
inline Json number(double v) {
  double r = std::strtod(format_number(v).c_str(), nullptr);
  if (r == 0.0) r = 0.0;
  return r;
}

inline Json complex(const Complex& c) { return Json::array({number(c.real()), number(c.imag())}); }

inline Json vector(const ComplexVec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex(v[i]));
  return out;
}

inline Json matrix(const ComplexMat& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex(m(i, j)));
    out.push_back(std::move(row));
  }
  return out;
}

template <class T, class F>
Json optional(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : Json(nullptr);
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline bool is_complex_pair(const Json& j) {
  return j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number();
}

inline std::string scalar(const Json& j) {
  if (j.is_null()) return "none";
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_unsigned()) return std::to_string(j.get<unsigned long long>());
  if (j.is_number()) return format_number(j.get<double>());
  return j.get<std::string>();
}

inline std::string complex_text(const Json& j) { return scalar(j[0]) + ":" + scalar(j[1]); }

/// Leaf arrays render on one line: numbers comma-separated, complex pairs as re:im.
inline bool inline_array(const Json& j, std::string& out) {
  if (!j.is_array()) return false;
  if (j.empty()) {
    out = "";
    return true;
  }
  const bool numbers = std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_number(); });
  const bool pairs = std::all_of(j.begin(), j.end(), is_complex_pair);
  if (!numbers && !pairs) return false;
  out.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (i) out += ",";
    out += numbers ? scalar(j[i]) : complex_text(j[i]);
  }
  return true;
}

inline void flatten(const Json& j, const std::string& path, std::ostringstream& out) {
  std::string line;
  if (j.is_object()) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
    }
  } else if (inline_array(j, line)) {
    out << path << "=" << line << "\n";
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "." + std::to_string(i), out);
  } else {
    out << path << "=" << scalar(j) << "\n";
  }
}

}  // namespace detail

inline std::string to_key_value(const Json& doc) {
  std::ostringstream out;
  detail::flatten(doc, "", out);
  return out.str();
}

inline std::string to_json_text(const Json& doc) { return doc.dump(2) + "\n"; }

inline std::string render(const Json& doc, bool json) { return json ? to_json_text(doc) : to_key_value(doc); }

// ---------------------------------------------------------------------------
// Documents

inline Json thresholds(const ergodicity::ClassifyOptions& opt) {
  Json radii = Json::array();
  for (double r : opt.grid_radii.empty() ? SampleGrid::near_boundary_radii() : opt.grid_radii) {
    radii.push_back(number(r));
  }
  return Json{
      {"seed", opt.seed},
      {"certificate_samples", opt.certificate_samples},
      {"fixed_point_residual", number(opt.fixed_point.residual_tolerance)},
      {"fixed_point_boundary_margin", number(opt.fixed_point.boundary_margin)},
      {"fixed_point_starts", opt.fixed_point.starts},
      {"kmax", opt.retraction.kmax},
      {"cauchy_tolerance", number(opt.retraction.cauchy_tolerance)},
      {"compact_grid_radius", number(opt.retraction.grid_radius)},
      {"eigen_cluster", number(opt.retraction.eigen_cluster)},
      {"budget", opt.criterion.budget},
      {"decay_threshold", number(opt.criterion.decay_threshold)},
      {"nondecay_factor", number(opt.criterion.nondecay_factor)},
      {"monotone_slack", number(opt.criterion.monotone_slack)},
      {"steep_ratio", number(opt.criterion.steep_ratio)},
      {"refine_steps", opt.criterion.refine_steps},
      {"grid_radii", radii},
      {"grid_directions", opt.grid_directions},
      {"denjoy_wolff_step_tolerance", number(opt.denjoy_wolff.step_tolerance)},
      {"denjoy_wolff_max_steps", opt.denjoy_wolff.max_steps},
  };
}

inline Json cauchy_trace(const std::vector<dynamics::CauchyStep>& trace) {
  Json out = Json::array();
  for (const auto& c : trace) out.push_back(Json{{"k", c.k}, {"j", c.j}, {"deviation", number(c.deviation)}});
  return out;
}

inline Json retraction(const dynamics::RetractionEstimate& est) {
  Json doc{{"status", dynamics::to_string(est.status)}};
  if (est.converged()) {
    doc["k"] = est.k;
    doc["s"] = est.s;
    doc["rank"] = static_cast<int>(est.d0_rho.rows()) - est.s;
    doc["rho_index"] = est.rho_index;
    Json eig = Json::array();
    for (const auto& l : est.eigenvalues) eig.push_back(complex(l));
    doc["eigenvalues"] = eig;
    doc["d0_rho"] = matrix(est.d0_rho);
  }
  doc["trace"] = cauchy_trace(est.convergence_trace);
  return doc;
}

inline Json normal_form(const dynamics::NormalForm& nf) {
  Json trace = Json::array();
  for (const auto& b : nf.block_trace) {
    trace.push_back(Json{{"j", b.j}, {"contracting_sup", number(b.contracting_sup)}});
  }
  return Json{
      {"s", nf.s},
      {"V", matrix(nf.V)},
      {"projection", matrix(nf.projection)},
      {"step1_residual", number(nf.step1_residual)},
      {"step2_residual", number(nf.step2_residual)},
      {"step3_residual", number(nf.step3_residual)},
      {"worst_sample", vector(nf.worst_sample)},
      {"block_trace", trace},
  };
}

inline Json classification(const ergodicity::ErgodicityReport& rep) {
  using namespace ergodicity;
  Json doc;
  doc["report"] = "analyze";
  doc["verdict"] = to_string(rep.verdict);
  doc["basis"] = to_string(rep.basis);
  doc["evidence"] = rep.basis == Basis::NoInteriorFixedPoint ? "theorem" : "numerical";
  doc["dim"] = rep.dim;
  doc["certificate_max_observed"] = number(rep.certificate_max);
  doc["fixed_point"] = optional(rep.fixed_point, [](const ComplexVec& p) { return vector(p); });
  doc["retraction_status"] =
      optional(rep.retraction_status, [](dynamics::RetractionStatus s) { return Json(dynamics::to_string(s)); });
  doc["k"] = optional(rep.k, [](int k) { return Json(k); });
  doc["s"] = optional(rep.s, [](int s) { return Json(s); });
  doc["retraction_trace"] = cauchy_trace(rep.retraction_trace);
  doc["criterion_outcome"] =
      optional(rep.criterion_outcome, [](CriterionOutcome o) { return Json(to_string(o)); });
  Json trace = Json::array();
  for (const auto& e : rep.criterion_trace) {
    trace.push_back(Json{{"j", e.j}, {"iterate", e.iterate}, {"sup", number(e.value)}});
  }
  doc["criterion_trace"] = trace;
  doc["resolution_horizon"] = optional(rep.horizon, [](long long h) { return Json(h); });
  doc["denjoy_wolff"] = optional(rep.denjoy_wolff, [](const dynamics::DenjoyWolffEstimate& d) {
    return Json{{"point", vector(d.point)},
                {"scatter", number(d.scatter)},
                {"boundary_gap", number(d.boundary_gap)},
                {"steps", d.max_steps_used}};
  });
  Json wit = Json::array();
  for (const auto& w : rep.witnesses) {
    wit.push_back(Json{{"function", w.function},
                       {"sup_difference", number(w.sup_difference)},
                       {"allowed", number(w.allowed)},
                       {"within", w.within}});
  }
  doc["witnesses"] = wit;
  doc["note"] = rep.note;
  doc["thresholds"] = thresholds(rep.options);
  return doc;
}

}  // namespace ballab::report
