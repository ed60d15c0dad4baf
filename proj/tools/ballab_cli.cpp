// Command-line front end: analyze map files and print reports.

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "ballab.hpp"

namespace {

using namespace ballab;
using report::Json;

enum ExitCode { kOk = 0, kParse = 2, kCertification = 3, kNumeric = 4 };

struct Common {
  bool json = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> kmax;
  std::optional<long long> budget;
  std::string grid_radii;
  int degree_bound = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_flag("--json", c.json, "Emit JSON instead of key=value lines");
  cmd->add_option("--seed", c.seed, "Quasi-random direction seed");
  cmd->add_option("--kmax", c.kmax, "Largest period searched")->check(CLI::PositiveNumber);
  cmd->add_option("--budget", c.budget, "Largest iterate index for the sup-norm criterion")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--grid-radii", c.grid_radii, "Comma-separated sup-norm grid radii in (0,1)");
  cmd->add_option("--degree-bound", c.degree_bound, "Truncation degree for series maps")
      ->check(CLI::PositiveNumber);
}

/// File overrides first, then explicit flags.
ergodicity::ClassifyOptions options_for(const MapSpec& spec, const Common& c) {
  ergodicity::ClassifyOptions opt;
  apply_overrides(spec.overrides, opt);
  if (c.seed) opt.seed = opt.fixed_point.seed = opt.retraction.seed = *c.seed;
  if (c.kmax) opt.retraction.kmax = *c.kmax;
  if (c.budget) opt.criterion.budget = *c.budget;
  if (!c.grid_radii.empty()) opt.grid_radii = parse_radii(c.grid_radii);
  return opt;
}

void emit(const Json& doc, bool json) { std::cout << report::render(doc, json); }

/// "re:im,re:im,..." with ":im" optional.
ComplexVec parse_point(const std::string& text) {
  std::vector<Complex> xs;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    const auto colon = item.find(':');
    const double re = parse_double(item.substr(0, colon), "point");
    const double im = colon == std::string::npos ? 0.0 : parse_double(item.substr(colon + 1), "point");
    xs.emplace_back(re, im);
  }
  if (xs.empty()) throw ParseError("point: empty coordinate list");
  ComplexVec v(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) v[static_cast<Eigen::Index>(i)] = xs[i];
  return v;
}

/// Map with phi(0) = 0: either as given or conjugated through an interior fixed point.
struct Centered {
  HoloMap map;
  std::optional<ComplexVec> fixed_point;
};

Centered centered(const HoloMap& map, bool conjugate, const ergodicity::ClassifyOptions& opt) {
  const ComplexVec zero = ComplexVec::Zero(map.dim());
  if (map(zero).norm() < 1e-10) return {map, std::nullopt};
  if (!conjugate) throw DomainError("map does not fix the origin; pass --conjugate to move a fixed point there");
  auto p = dynamics::find_interior_fixed_point(map, opt.fixed_point);
  if (!p) throw DomainError("map has no interior fixed point");
  return {dynamics::conjugate_to_origin(map, *p), p};
}

int cmd_analyze(const std::string& path, const Common& c) {
  const MapSpec spec = load_map_spec(path, c.degree_bound);
  const auto rep = ergodicity::classify(spec.map, options_for(spec, c));
  emit(report::classification(rep), c.json);
  return kOk;
}

int cmd_metric(const std::string& zs, const std::string& ws, bool json) {
  const ComplexVec z = parse_point(zs), w = parse_point(ws);
  require_same_dim(z, w, "metric");
  const double d = geometry::bergman_distance(z, w);
  Json doc;
  doc["report"] = "metric";
  doc["z"] = report::vector(z);
  doc["w"] = report::vector(w);
  doc["bergman_distance"] = report::number(d);
  doc["p4_gap"] = report::number(geometry::p4_gap(z, w));
  doc["involution_residual_z"] = report::number((geometry::involution(z, geometry::involution(z, w)) - w).norm());
  doc["involution_residual_w"] = report::number((geometry::involution(w, geometry::involution(w, z)) - z).norm());
  doc["involution_at_z"] = report::number(geometry::involution(z, z).norm());
  doc["involution_at_origin"] = report::number((geometry::involution(z, ComplexVec::Zero(z.size())) - z).norm());
  emit(doc, json);
  return kOk;
}

int cmd_retraction(const std::string& path, bool conjugate, const Common& c) {
  const MapSpec spec = load_map_spec(path, c.degree_bound);
  const auto opt = options_for(spec, c);
  certify_self_map(spec.map, opt.certificate_samples, opt.seed);
  const Centered m = centered(spec.map, conjugate, opt);
  const auto est = dynamics::estimate_retraction(m.map, opt.retraction);
  Json doc;
  doc["report"] = "retraction";
  doc["fixed_point"] = report::optional(m.fixed_point, [](const ComplexVec& p) { return report::vector(p); });
  doc["retraction"] = report::retraction(est);
  if (est.converged()) doc["linear_residual"] = report::number(dynamics::verify_linear_retraction(est));
  emit(doc, c.json);
  return kOk;
}

int cmd_normal_form(const std::string& path, bool conjugate, const Common& c) {
  const MapSpec spec = load_map_spec(path, c.degree_bound);
  const auto opt = options_for(spec, c);
  certify_self_map(spec.map, opt.certificate_samples, opt.seed);
  const Centered m = centered(spec.map, conjugate, opt);
  const auto est = dynamics::estimate_retraction(m.map, opt.retraction);
  Json doc;
  doc["report"] = "normal-form";
  doc["fixed_point"] = report::optional(m.fixed_point, [](const ComplexVec& p) { return report::vector(p); });
  doc["status"] = dynamics::to_string(est.status);
  if (est.converged()) {
    doc["k"] = est.k;
    doc["normal_form"] = report::normal_form(dynamics::normal_form(est, m.map));
  }
  doc["retraction_trace"] = report::cauchy_trace(est.convergence_trace);
  emit(doc, c.json);
  return kOk;
}

int cmd_cesaro(const std::string& path, long long j, double radius, const Common& c) {
  const MapSpec spec = load_map_spec(path, c.degree_bound);
  const auto opt = options_for(spec, c);
  certify_self_map(spec.map, opt.certificate_samples, opt.seed);
  const Centered m{spec.map, std::nullopt};
  // The limit projection needs the retraction, estimated when phi(0) = 0.
  std::optional<dynamics::RetractionEstimate> est;
  if (spec.map(ComplexVec::Zero(spec.map.dim())).norm() < 1e-10) {
    est = dynamics::estimate_retraction(spec.map, opt.retraction);
  }
  const auto pts = SampleGrid::compact(m.map.dim(), radius, 4, 16, opt.seed).points();
  Json doc;
  doc["report"] = "cesaro";
  doc["j"] = j;
  doc["grid_radius"] = report::number(radius);
  doc["retraction_status"] = est ? dynamics::to_string(est->status) : "NOT_ESTIMATED";
  Json rows = Json::array();
  for (const auto& f : ergodicity::test_battery(m.map.dim())) {
    const auto mj = ergodicity::cesaro_mean(m.map, f, j, pts);
    double sup_mean = 0.0;
    for (const auto& v : mj) sup_mean = std::max(sup_mean, std::abs(v));
    Json row{{"function", f.name}, {"sup_mean", report::number(sup_mean)}};
    if (est && est->converged()) {
      const auto pf = ergodicity::limit_projection(m.map, *est, f, pts);
      double diff = 0.0;
      for (std::size_t i = 0; i < pts.size(); ++i) diff = std::max(diff, std::abs(mj[i] - pf[i]));
      row["sup_difference_to_limit"] = report::number(diff);
    } else {
      row["sup_difference_to_limit"] = nullptr;
    }
    rows.push_back(std::move(row));
  }
  doc["functions"] = rows;
  emit(doc, c.json);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Holomorphic self-maps of the unit ball: iterates, retractions, mean ergodicity"};
  app.require_subcommand(1);

  Common common;
  std::string path;
  bool conjugate = false;

  auto* analyze = app.add_subcommand("analyze", "Classify the composition operator of a map");
  analyze->add_option("map", path, "Map definition file")->required();
  add_common(analyze, common);

  std::string z, w;
  bool metric_json = false;
  auto* metric = app.add_subcommand("metric", "Bergman distance between two points");
  metric->add_option("z", z, "Point as re:im,re:im,...")->required();
  metric->add_option("w", w, "Point as re:im,re:im,...")->required();
  metric->add_flag("--json", metric_json, "Emit JSON");

  auto* nf = app.add_subcommand("normal-form", "Normal form V^-1 phi_j V of a map fixing the origin");
  nf->add_option("map", path, "Map definition file")->required();
  nf->add_flag("--conjugate", conjugate, "Move an interior fixed point to the origin first");
  add_common(nf, common);

  auto* retr = app.add_subcommand("retraction", "Period, limit retraction and rank split");
  retr->add_option("map", path, "Map definition file")->required();
  retr->add_flag("--conjugate", conjugate, "Move an interior fixed point to the origin first");
  add_common(retr, common);

  long long j = 1024;
  double radius = 0.9;
  auto* ces = app.add_subcommand("cesaro", "Cesaro means of the test battery against the limit projection");
  ces->add_option("map", path, "Map definition file")->required();
  ces->add_option("-j,--iterations", j, "Number of terms in the mean")->check(CLI::PositiveNumber);
  ces->add_option("--radius", radius, "Radius of the evaluation grid")->check(CLI::Range(0.0, 1.0));
  add_common(ces, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kParse;
  }

  try {
    if (*analyze) return cmd_analyze(path, common);
    if (*metric) return cmd_metric(z, w, metric_json);
    if (*nf) return cmd_normal_form(path, conjugate, common);
    if (*retr) return cmd_retraction(path, conjugate, common);
    if (*ces) return cmd_cesaro(path, j, radius, common);
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kParse;
  } catch (const CertificationError& e) {
    std::cerr << "certification refused: " << e.what() << "\n";
    return kCertification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumeric;
  }
  return kOk;
}
