// Command-line front end. Flags override the values of a --config file.

#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fcheeger/cli.hpp"

namespace {

using fcheeger::json;

struct Binder {
  std::vector<std::function<void(json&)>> apply;

  template <class T>
  void add(CLI::App* app, const std::string& flag, const std::string& key, T& slot,
           const std::string& help) {
    CLI::Option* o = app->add_option(flag, slot, help);
    if constexpr (requires { slot.push_back(0.0); }) o->delimiter(',');
    apply.push_back([o, key, &slot](json& j) {
      if (o->count() > 0) j[key] = slot;
    });
  }
};

int fail(int code, const std::string& kind, const std::string& msg) {
  std::cout << fcheeger::error_json(code, kind, msg).dump(2) << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal Cheeger constants and fractional p-Laplacian eigenvalues on grids"};
  app.require_subcommand(1);
  fcheeger::RunConfig v;
  std::string config_path;
  Binder bind;
  for (const auto& name : fcheeger::run_commands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON run configuration");
    bind.add(sub, "--shape", "shape", v.shape, "interval, box, ball, annulus or mask");
    bind.add(sub, "--dim", "dim", v.dim, "dimension (default: 1 for interval, else 2)");
    bind.add(sub, "--len", "len", v.len, "interval length or box side");
    bind.add(sub, "--width", "width", v.width, "box height");
    bind.add(sub, "--radius", "radius", v.radius, "ball or outer annulus radius");
    bind.add(sub, "--inner", "inner", v.inner, "inner annulus radius");
    bind.add(sub, "--mask", "mask", v.mask, "mask file for --shape mask");
    bind.add(sub, "--cells", "cells", v.cells, "cells along x");
    bind.add(sub, "--s", "s", v.s, "fractional order");
    bind.add(sub, "--p", "p", v.p, "exponent");
    bind.add(sub, "--truncation", "truncation_radius", v.truncation_radius,
             "kernel truncation radius (0 covers the grid)");
    bind.add(sub, "--levels", "near_field_levels", v.near_field_levels,
             "near-field quadrature depth");
    bind.add(sub, "--seed", "seed", v.seed, "random seed");
    bind.add(sub, "--out", "out", v.out, "output prefix");
    bind.add(sub, "--suite", "suite", v.suite, "verify suite");
    bind.add(sub, "--trials", "trials", v.trials, "verify trials");
    bind.add(sub, "--s-list", "s_list", v.s_list, "sweep-s values");
    bind.add(sub, "--p-list", "p_list", v.p_list, "sweep-p values");
    bind.add(sub, "--starts", "random_starts", v.random_starts, "random eigen starts");
    bind.add(sub, "--max-iterations", "max_iterations", v.max_iterations, "eigen iteration cap");
    bind.add(sub, "--points", "points", v.points, "curvature sample points");
    bind.add(sub, "--delta", "delta", v.delta, "curvature excision radius (0: half a cell)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    return fail(fcheeger::kConfigError, "usage", e.what());
  }

  try {
    json j = json::object();
    if (!config_path.empty()) {
      std::ifstream f(config_path);
      if (!f) return fail(fcheeger::kConfigError, "config", "cannot open " + config_path);
      try {
        f >> j;
      } catch (const json::exception& e) {
        return fail(fcheeger::kConfigError, "config", e.what());
      }
      if (!j.is_object()) return fail(fcheeger::kConfigError, "config", "config must be an object");
    }
    for (auto& a : bind.apply) a(j);
    j["command"] = app.get_subcommands().front()->get_name();
    const fcheeger::RunConfig cfg = fcheeger::config_from_json(j);
    return fcheeger::run(cfg, std::cout);
  } catch (const fcheeger::ConfigError& e) {
    return fail(fcheeger::kConfigError, "config", e.what());
  } catch (const fcheeger::ConvergenceError& e) {
    return fail(fcheeger::kNotConverged, "convergence", e.what());
  } catch (const std::exception& e) {
    return fail(fcheeger::kConfigError, "runtime", e.what());
  }
}
