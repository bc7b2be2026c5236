#ifndef FCHEEGER_IO_HPP
#define FCHEEGER_IO_HPP

// JSON/CSV serialization of domains, fields and results, and the binary
// kernel-table cache.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fcheeger/cheeger.hpp"
#include "fcheeger/common.hpp"
#include "fcheeger/eigenvalue.hpp"
#include "fcheeger/functional.hpp"
#include "fcheeger/geometry.hpp"
#include "fcheeger/kernel.hpp"

namespace fcheeger {

using json = nlohmann::json;

// -- grids and shapes --------------------------------------------------------

inline json grid_to_json(const GridSpec& g) {
  json j;
  j["dim"] = g.dim;
  j["cells"] = g.dim == 1 ? json::array({g.cells[0]}) : json::array({g.cells[0], g.cells[1]});
  j["spacing"] = g.spacing;
  j["origin"] = g.dim == 1 ? json::array({g.origin[0]}) : json::array({g.origin[0], g.origin[1]});
  return j;
}

inline GridSpec grid_from_json(const json& j) {
  try {
    GridSpec g;
    g.dim = j.at("dim").get<int>();
    const auto cells = j.at("cells").get<std::vector<int>>();
    const auto origin = j.value("origin", std::vector<double>(g.dim, 0.0));
    require(cells.size() == static_cast<std::size_t>(g.dim) &&
                origin.size() == static_cast<std::size_t>(g.dim),
            "grid: cells/origin need one entry per axis");
    g.cells = {cells[0], g.dim == 2 ? cells[1] : 1};
    g.origin = {origin[0], g.dim == 2 ? origin[1] : 0.0};
    g.spacing = j.at("spacing").get<double>();
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

inline ShapeSpec shape_from_json(const json& j) {
  try {
    const std::string kind = j.at("kind").get<std::string>();
    ShapeSpec s;
    if (kind == "interval") {
      if (j.contains("lo")) {
        return interval_shape(j.at("lo").get<double>(), j.at("hi").get<double>());
      }
      s.kind = ShapeKind::Interval;
      s.center = j.at("center").get<std::vector<double>>();
      s.half_widths = j.at("half_widths").get<std::vector<double>>();
    } else if (kind == "box") {
      s.kind = ShapeKind::Box;
      s.center = j.at("center").get<std::vector<double>>();
      s.half_widths = j.at("half_widths").get<std::vector<double>>();
    } else if (kind == "ball") {
      s.kind = ShapeKind::Ball;
      s.center = j.at("center").get<std::vector<double>>();
      s.radius = j.at("radius").get<double>();
    } else if (kind == "annulus") {
      s.kind = ShapeKind::Annulus;
      s.center = j.at("center").get<std::vector<double>>();
      s.inner_radius = j.at("inner_radius").get<double>();
      s.outer_radius = j.at("outer_radius").get<double>();
    } else if (kind == "mask-file") {
      s.kind = ShapeKind::MaskFile;
      s.path = j.at("path").get<std::string>();
    } else {
      throw ConfigError("unknown shape kind: " + kind);
    }
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("shape: ") + e.what());
  }
}

// -- run-length masks ---------------------------------------------------------

/// Alternating run lengths, the first run counting zeros (possibly 0).
inline std::vector<int> rle_encode(std::span<const std::uint8_t> mask) {
  std::vector<int> runs;
  std::uint8_t cur = 0;
  int len = 0;
  for (auto m : mask) {
    const std::uint8_t b = m ? 1 : 0;
    if (b == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = b;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

inline CellMask rle_decode(const std::vector<int>& runs) {
  CellMask out;
  std::uint8_t cur = 0;
  for (int r : runs) {
    require(r >= 0, "negative run length");
    out.insert(out.end(), r, cur);
    cur ^= 1;
  }
  return out;
}

// -- results ------------------------------------------------------------------

inline json cheeger_to_json(const CheegerResult& r) {
  json j;
  j["h"] = r.h;
  j["set_mask_rle"] = rle_encode(r.optimal_set);
  json it = json::array();
  for (const auto& s : r.iterations)
    it.push_back({{"lambda", s.lambda}, {"subproblem_value", s.subproblem_value}});
  j["iterations"] = it;
  j["dual_sup_norm"] = r.dual_sup_norm;
  j["calibrable"] = r.calibrable;
  j["set_measure"] = r.set_measure;
  j["set_perimeter"] = r.set_perimeter;
  j["divergence_residual"] = r.certificate.residual;
  return j;
}

inline json eigen_to_json(const EigenResult& r) {
  json j;
  j["s"] = r.s;
  j["p"] = r.p;
  j["lambda"] = r.lambda;
  j["el_residual"] = r.el_residual;
  j["converged"] = r.converged;
  j["stop_reason"] = r.stop_reason;
  j["iterations"] = r.iterations;
  j["restart_values"] = r.restart_values;
  j["restart_spread"] = r.restart_spread;
  j["sup_norm"] = r.field.sup_norm();
  return j;
}

// -- fields -------------------------------------------------------------------

/// "index,value" rows (grid linear index) plus a JSON sidecar at
/// path + ".json" carrying the grid and the domain mask.
inline void write_field_csv(const ScalarField& f, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write " + path);
  out << "index,value\n";
  for (std::size_t k = 0; k < f.values.size(); ++k)
    out << f.domain.cells()[k] << ',' << format_real(f.values[k]) << '\n';
  std::ofstream side(path + ".json");
  require(static_cast<bool>(side), "cannot write " + path + ".json");
  json j;
  j["grid"] = grid_to_json(f.domain.grid());
  j["mask_rle"] = rle_encode(f.domain.mask());
  side << j.dump(2) << '\n';
}

inline ScalarField read_field_csv(const std::string& path) {
  std::ifstream side(path + ".json");
  require(static_cast<bool>(side), "missing sidecar " + path + ".json");
  json j;
  try {
    side >> j;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("sidecar: ") + e.what());
  }
  const GridSpec g = grid_from_json(j.at("grid"));
  CellMask mask = rle_decode(j.at("mask_rle").get<std::vector<int>>());
  require(mask.size() == static_cast<std::size_t>(g.cell_count()), "sidecar mask size mismatch");
  GridDomain d(g, std::move(mask));
  std::vector<double> grid_vals(g.cell_count(), 0.0);
  std::vector<std::uint8_t> seen(g.cell_count(), 0);
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open " + path);
  std::string line;
  std::getline(in, line);
  require(line == "index,value", "field csv: bad header");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    require(comma != std::string::npos, "field csv: bad row");
    const int idx = std::stoi(line.substr(0, comma));
    require(idx >= 0 && idx < g.cell_count() && d.contains(idx), "field csv: index outside domain");
    grid_vals[idx] = std::strtod(line.c_str() + comma + 1, nullptr);
    seen[idx] = 1;
  }
  std::vector<double> v;
  for (int c : d.cells()) {
    require(seen[c], "field csv: missing value for a domain cell");
    v.push_back(grid_vals[c]);
  }
  return ScalarField(d, std::move(v));
}

// -- kernel cache -------------------------------------------------------------

namespace detail {

inline std::string hex_bits(double x) {
  std::uint64_t b;
  std::memcpy(&b, &x, sizeof b);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(b));
  return buf;
}

template <class T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T>
T get(std::istream& is) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof v);
  require(static_cast<bool>(is), "kernel cache: truncated file");
  return v;
}

constexpr char kCacheMagic[8] = {'F', 'C', 'K', 'T', 'B', 'L', '0', '1'};

}  // namespace detail

/// Cache file name for (dim, alpha, spacing, truncation radius, levels).
inline std::string table_cache_name(const KernelParams& kp, double spacing) {
  return "kt_d" + std::to_string(kp.dim) + "_a" + detail::hex_bits(kp.alpha()) + "_h" +
         detail::hex_bits(spacing) + "_r" + detail::hex_bits(kp.truncation_radius) + "_l" +
         std::to_string(kp.near_field_levels) + ".bin";
}

inline void save_table(const KernelTable& t, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  require(static_cast<bool>(os), "cannot write kernel cache " + path);
  os.write(detail::kCacheMagic, sizeof detail::kCacheMagic);
  const auto& kp = t.params();
  detail::put<std::int32_t>(os, kp.dim);
  detail::put<std::int32_t>(os, kp.near_field_levels);
  detail::put<double>(os, kp.alpha());
  detail::put<double>(os, t.spacing());
  detail::put<double>(os, kp.truncation_radius);
  detail::put<std::int32_t>(os, t.reach(0));
  detail::put<std::int32_t>(os, t.reach(1));
  const auto& w = t.raw_unit_weights();
  detail::put<std::uint64_t>(os, w.size());
  os.write(reinterpret_cast<const char*>(w.data()), static_cast<std::streamsize>(w.size() * sizeof(double)));
  detail::put<double>(os, t.unit_tail());
  detail::put<double>(os, t.unit_cell_complement());
}

/// Loads a cached table; `params` supplies s and p (only alpha is keyed).
inline KernelTable load_table(const std::string& path, const KernelParams& params) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), "cannot open kernel cache " + path);
  char magic[8];
  is.read(magic, sizeof magic);
  require(static_cast<bool>(is) && std::memcmp(magic, detail::kCacheMagic, 8) == 0,
          "kernel cache: bad magic");
  KernelParams kp = params;
  kp.dim = detail::get<std::int32_t>(is);
  kp.near_field_levels = detail::get<std::int32_t>(is);
  const double alpha = detail::get<double>(is);
  const double spacing = detail::get<double>(is);
  kp.truncation_radius = detail::get<double>(is);
  require(alpha == params.alpha() && kp.dim == params.dim, "kernel cache: key mismatch");
  std::array<int, 2> reach{detail::get<std::int32_t>(is), detail::get<std::int32_t>(is)};
  const auto count = detail::get<std::uint64_t>(is);
  require(count == static_cast<std::uint64_t>(2 * reach[0] + 1) * (2 * reach[1] + 1),
          "kernel cache: bad size");
  std::vector<double> w(count);
  is.read(reinterpret_cast<char*>(w.data()), static_cast<std::streamsize>(count * sizeof(double)));
  require(static_cast<bool>(is), "kernel cache: truncated file");
  const double tail = detail::get<double>(is);
  const double complement = detail::get<double>(is);
  return table_from_raw(kp, spacing, reach, std::move(w), tail, complement);
}

/// build_table through the cache directory `dir` (no caching when empty).
/// The directory defaults to $FCHEEGER_CACHE_DIR.
inline KernelTable cached_table(const KernelParams& params, const GridSpec& grid,
                                std::string dir = {}) {
  if (dir.empty()) {
    if (const char* env = std::getenv("FCHEEGER_CACHE_DIR")) dir = env;
  }
  if (dir.empty()) return build_table(params, grid);
  KernelParams kp = params;
  if (kp.truncation_radius <= 0.0) kp.truncation_radius = covering_radius(grid);
  namespace fs = std::filesystem;
  const fs::path file = fs::path(dir) / table_cache_name(kp, grid.spacing);
  if (fs::exists(file)) {
    KernelTable t = load_table(file.string(), kp);
    if (t.spacing() == grid.spacing) return t;
  }
  KernelTable t = build_table(kp, grid);
  fs::create_directories(dir);
  save_table(t, file.string());
  return t;
}

}  // namespace fcheeger

#endif  // FCHEEGER_IO_HPP
