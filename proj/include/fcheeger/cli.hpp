#ifndef FCHEEGER_CLI_HPP
#define FCHEEGER_CLI_HPP

// Batch runs: a RunConfig names one study, run() performs it, prints a JSON
// summary and writes the artifacts next to the `out` prefix.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcheeger/cheeger.hpp"
#include "fcheeger/common.hpp"
#include "fcheeger/eigenvalue.hpp"
#include "fcheeger/functional.hpp"
#include "fcheeger/geometry.hpp"
#include "fcheeger/io.hpp"
#include "fcheeger/kernel.hpp"
#include "fcheeger/verify.hpp"

namespace fcheeger {

enum ExitCode : int { kOk = 0, kConfigError = 2, kVerifyFailed = 3, kNotConverged = 4 };

struct RunConfig {
  std::string command;
  // Domain: interval and box use len (and width) with `cells` cells along x;
  // ball and annulus are rasterized on a cells x cells grid over their
  // bounding square; mask reads a mask file.
  std::string shape = "interval";
  int dim = 0;  // 0: 1 for intervals, 2 otherwise
  double len = 1.0;
  double width = 0.0;  // box height, 0 means len
  double radius = 0.5;
  double inner = 0.25;
  std::string mask;
  int cells = 16;
  double s = 0.5;
  double p = 1.0;
  double truncation_radius = 0.0;
  int near_field_levels = 1;
  std::uint64_t seed = 1;
  std::string out;
  // verify
  std::string suite = "all";
  int trials = 1000;
  // sweeps
  std::vector<double> s_list{0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
  std::vector<double> p_list{2.0, 1.5, 1.25, 1.1, 1.05};
  // eigen
  int random_starts = 5;
  int max_iterations = 5000;
  // curvature
  int points = 5;
  double delta = 0.0;
};

inline const std::vector<std::string>& run_commands() {
  static const std::vector<std::string> c{"perimeter", "cheeger",   "eigen", "sweep-p",
                                          "sweep-s",   "curvature", "verify"};
  return c;
}

inline json config_to_json(const RunConfig& c) {
  return json{{"command", c.command},
              {"shape", c.shape},
              {"dim", c.dim},
              {"len", c.len},
              {"width", c.width},
              {"radius", c.radius},
              {"inner", c.inner},
              {"mask", c.mask},
              {"cells", c.cells},
              {"s", c.s},
              {"p", c.p},
              {"truncation_radius", c.truncation_radius},
              {"near_field_levels", c.near_field_levels},
              {"seed", c.seed},
              {"out", c.out},
              {"suite", c.suite},
              {"trials", c.trials},
              {"s_list", c.s_list},
              {"p_list", c.p_list},
              {"random_starts", c.random_starts},
              {"max_iterations", c.max_iterations},
              {"points", c.points},
              {"delta", c.delta}};
}

/// Fields absent from j keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const json& j) {
  require(j.is_object(), "config must be a JSON object");
  RunConfig c;
  const json known = config_to_json(c);
  for (const auto& [key, _] : j.items())
    require(known.contains(key), "unknown config key: " + key);
  try {
    auto get = [&](const char* k, auto& dst) {
      if (j.contains(k)) j.at(k).get_to(dst);
    };
    get("command", c.command);
    get("shape", c.shape);
    get("dim", c.dim);
    get("len", c.len);
    get("width", c.width);
    get("radius", c.radius);
    get("inner", c.inner);
    get("mask", c.mask);
    get("cells", c.cells);
    get("s", c.s);
    get("p", c.p);
    get("truncation_radius", c.truncation_radius);
    get("near_field_levels", c.near_field_levels);
    get("seed", c.seed);
    get("out", c.out);
    get("suite", c.suite);
    get("trials", c.trials);
    get("s_list", c.s_list);
    get("p_list", c.p_list);
    get("random_starts", c.random_starts);
    get("max_iterations", c.max_iterations);
    get("points", c.points);
    get("delta", c.delta);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return c;
}

inline void validate_config(const RunConfig& c) {
  const auto& cmds = run_commands();
  require(std::find(cmds.begin(), cmds.end(), c.command) != cmds.end(),
          "unknown command: " + c.command);
  require(c.shape == "interval" || c.shape == "box" || c.shape == "ball" ||
              c.shape == "annulus" || c.shape == "mask",
          "unknown shape: " + c.shape);
  require(c.dim == 0 || c.dim == 1 || c.dim == 2, "dim must be 1 or 2");
  require(c.cells >= 1 && c.cells <= 4096, "cells must lie in [1, 4096]");
  require(c.len > 0.0 && c.width >= 0.0 && c.radius > 0.0, "lengths must be positive");
  require(c.shape != "annulus" || (c.inner > 0.0 && c.inner < c.radius),
          "annulus needs 0 < inner < radius");
  require(c.shape != "mask" || !c.mask.empty(), "shape mask needs a mask path");
  require(c.trials >= 1, "trials must be >= 1");
  require(c.points >= 1, "points must be >= 1");
  require(c.random_starts >= 0 && c.max_iterations >= 1, "bad eigen iteration settings");
  require(!c.s_list.empty() && !c.p_list.empty(), "sweep lists must be nonempty");
}

inline GridDomain make_domain(const RunConfig& c) {
  if (c.shape == "mask") return load_mask_file(c.mask);
  const int dim = c.dim != 0 ? c.dim : (c.shape == "interval" ? 1 : 2);
  if (c.shape == "interval" || c.shape == "box") {
    const double h = c.len / c.cells;
    if (dim == 1) return GridDomain::full(make_grid_1d(c.cells, h));
    const double w = c.width > 0.0 ? c.width : c.len;
    const int ny = std::max(1, static_cast<int>(std::lround(w / h)));
    return GridDomain::full(make_grid_2d(c.cells, ny, h));
  }
  const double r = c.radius;
  const double h = 2.0 * r / c.cells;
  const GridSpec g = dim == 1 ? make_grid_1d(c.cells, h, -r) : make_grid_2d(c.cells, c.cells, h, {-r, -r});
  const std::vector<double> center(dim, 0.0);
  const ShapeSpec shape = c.shape == "ball" ? ball_shape(center, r) : annulus_shape(center, c.inner, r);
  return rasterize(shape, g);
}

inline KernelParams kernel_params(const RunConfig& c, int dim, double s, double p) {
  KernelParams kp;
  kp.dim = dim;
  kp.s = s;
  kp.p = p;
  kp.truncation_radius = c.truncation_radius;
  kp.near_field_levels = c.near_field_levels;
  return kp;
}

namespace detail {

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  require(static_cast<bool>(f), "cannot write " + path);
  f << text;
}

/// Shortest representation that reads back to the same double.
inline std::string csv_real(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

inline EigenOptions eigen_options(const RunConfig& c) {
  EigenOptions o;
  o.random_starts = c.random_starts;
  o.max_iterations = c.max_iterations;
  return o;
}

}  // namespace detail

/// Performs the run; the JSON summary goes to `out`. Returns an ExitCode.
inline int run(const RunConfig& c, std::ostream& out) {
  validate_config(c);
  json res;
  res["command"] = c.command;
  res["config"] = config_to_json(c);
  int code = kOk;

  if (c.command == "verify") {
    VerifyOptions vo;
    vo.trials = c.trials;
    vo.seed = c.seed;
    const VerifyReport rep = run_verify(c.suite, vo);
    json items = json::array();
    for (const auto& it : rep.items)
      items.push_back({{"suite", it.suite},
                       {"name", it.name},
                       {"passed", it.passed},
                       {"margin", it.margin},
                       {"detail", it.detail}});
    res["checks"] = items;
    res["passed"] = rep.passed();
    if (!rep.passed()) code = kVerifyFailed;
  } else {
    const GridDomain dom = make_domain(c);
    const GridSpec& g = dom.grid();
    res["grid"] = grid_to_json(g);
    res["domain_cells"] = dom.cell_count();
    res["domain_measure"] = measure(dom);

    if (c.command == "perimeter") {
      const KernelTable tab = cached_table(kernel_params(c, g.dim, c.s, 1.0), g);
      res["P_s"] = s_perimeter(g, dom.mask(), tab);
      res["classical_perimeter"] = classical_perimeter(dom);
    } else if (c.command == "cheeger") {
      const KernelTable tab = cached_table(kernel_params(c, g.dim, c.s, 1.0), g);
      const CheegerResult r = solve_cheeger(dom, tab);
      res["result"] = cheeger_to_json(r);
      res["h"] = r.h;
    } else if (c.command == "eigen") {
      require(c.p > 1.0, "eigen needs p > 1");
      const KernelTable tab = cached_table(kernel_params(c, g.dim, c.s, c.p), g);
      const EigenResult r = solve_eigen(dom, tab, c.seed, detail::eigen_options(c));
      res["result"] = eigen_to_json(r);
      res["lambda"] = r.lambda;
      if (!c.out.empty()) write_field_csv(r.field, c.out + ".field.csv");
      if (!r.converged) code = kNotConverged;
    } else if (c.command == "sweep-s") {
      const auto pts = s_to_1_sweep(dom, c.s_list, kernel_params(c, g.dim, 0.5, 1.0));
      std::ostringstream csv;
      csv << "s,value,target\n";
      json series = json::array();
      for (const auto& pt : pts) {
        csv << detail::csv_real(pt.s) << ',' << detail::csv_real(pt.value) << ','
            << detail::csv_real(pt.target) << '\n';
        series.push_back({{"s", pt.s}, {"value", pt.value}, {"target", pt.target}});
      }
      res["series"] = series;
      if (!c.out.empty()) detail::write_text(c.out + ".csv", csv.str());
    } else if (c.command == "sweep-p") {
      const auto pts = p_to_1_sweep(dom, c.s, c.p_list, c.seed, detail::eigen_options(c),
                                    kernel_params(c, g.dim, c.s, 1.0));
      std::ostringstream csv;
      csv << "p,lambda,target_h_s,gap\n";
      json series = json::array();
      for (const auto& pt : pts) {
        csv << detail::csv_real(pt.p) << ',' << detail::csv_real(pt.lambda) << ','
            << detail::csv_real(pt.target_h_s) << ',' << detail::csv_real(pt.gap) << '\n';
        series.push_back({{"p", pt.p},
                          {"lambda", pt.lambda},
                          {"target_h_s", pt.target_h_s},
                          {"gap", pt.gap},
                          {"converged", pt.converged}});
        if (!pt.converged) code = kNotConverged;
      }
      res["series"] = series;
      if (!c.out.empty()) detail::write_text(c.out + ".csv", csv.str());
    } else if (c.command == "curvature") {
      const KernelTable tab = cached_table(kernel_params(c, g.dim, c.s, 1.0), g);
      const CheegerResult r = solve_cheeger(dom, tab);
      const auto pts = free_boundary_points(dom, r.optimal_set);
      res["h"] = r.h;
      json samples = json::array();
      for (const Vec2& x : spread_points(pts, c.points)) {
        const double hc = nonlocal_mean_curvature(g, r.optimal_set, x, tab, c.delta);
        samples.push_back({{"x", g.dim == 1 ? json::array({x[0]}) : json::array({x[0], x[1]})},
                           {"curvature", hc},
                           {"ratio_to_minus_h", -hc / r.h}});
      }
      res["free_boundary_points"] = pts.size();
      res["samples"] = samples;
    }
  }
  res["exit_code"] = code;
  const std::string text = res.dump(2) + "\n";
  out << text;
  if (!c.out.empty()) detail::write_text(c.out + ".json", text);
  return code;
}

inline json error_json(int code, const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}, {"exit_code", code}};
}

}  // namespace fcheeger

#endif  // FCHEEGER_CLI_HPP
