#ifndef FCHEEGER_GEOMETRY_HPP
#define FCHEEGER_GEOMETRY_HPP

// Uniform 1D/2D grids, domains as cell masks, shape rasterization and the
// exact geometric quantities used by the nonlocal functionals.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "fcheeger/common.hpp"

namespace fcheeger {

using Vec2 = std::array<double, 2>;
using Offset = std::array<int, 2>;

struct Box {
  Vec2 lo{0.0, 0.0};
  Vec2 hi{0.0, 0.0};
};

/// Uniform cell grid. In 1D the second axis has one cell and is ignored.
/// Cells are indexed linearly as ix + cells[0] * iy.
struct GridSpec {
  int dim = 1;
  std::array<int, 2> cells{1, 1};
  double spacing = 1.0;
  Vec2 origin{0.0, 0.0};

  void validate() const {
    require(dim == 1 || dim == 2, "grid dim must be 1 or 2");
    require(cells[0] >= 1 && cells[1] >= 1, "cells_per_axis must be >= 1");
    require(dim == 2 || cells[1] == 1, "1D grid must have a single row");
    require(std::isfinite(spacing) && spacing > 0.0, "spacing must be > 0");
    require(std::isfinite(origin[0]) && std::isfinite(origin[1]),
            "origin must be finite");
  }

  int cell_count() const { return cells[0] * cells[1]; }
  int index(int ix, int iy) const { return ix + cells[0] * iy; }
  Offset coords(int idx) const { return {idx % cells[0], idx / cells[0]}; }
  bool in_grid(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < cells[0] && iy < cells[1];
  }

  Vec2 center(int idx) const {
    const auto c = coords(idx);
    Vec2 out{origin[0] + (c[0] + 0.5) * spacing, 0.0};
    if (dim == 2) out[1] = origin[1] + (c[1] + 0.5) * spacing;
    return out;
  }

  Box cell_box(int idx) const {
    const auto c = coords(idx);
    Box b;
    b.lo[0] = origin[0] + c[0] * spacing;
    b.hi[0] = origin[0] + (c[0] + 1) * spacing;
    if (dim == 2) {
      b.lo[1] = origin[1] + c[1] * spacing;
      b.hi[1] = origin[1] + (c[1] + 1) * spacing;
    }
    return b;
  }

  Box bounds() const {
    Box b;
    b.lo = origin;
    b.hi[0] = origin[0] + cells[0] * spacing;
    b.hi[1] = dim == 2 ? origin[1] + cells[1] * spacing : origin[1];
    return b;
  }

  double cell_volume() const { return std::pow(spacing, dim); }

  /// Integer grid dimensions plus spacing and origin all equal.
  bool operator==(const GridSpec&) const = default;
};

/// Convenience constructors.
inline GridSpec make_grid_1d(int n, double spacing, double origin = 0.0) {
  GridSpec g;
  g.dim = 1;
  g.cells = {n, 1};
  g.spacing = spacing;
  g.origin = {origin, 0.0};
  g.validate();
  return g;
}

inline GridSpec make_grid_2d(int nx, int ny, double spacing, Vec2 origin = {0.0, 0.0}) {
  GridSpec g;
  g.dim = 2;
  g.cells = {nx, ny};
  g.spacing = spacing;
  g.origin = origin;
  g.validate();
  return g;
}

/// The set Omega: a nonempty finite union of closed grid cells.
class GridDomain {
 public:
  GridDomain(GridSpec grid, CellMask mask) : grid_(grid), mask_(std::move(mask)) {
    grid_.validate();
    require(mask_.size() == static_cast<std::size_t>(grid_.cell_count()),
            "mask size does not match grid");
    for (auto& m : mask_) m = m ? 1 : 0;
    for (int i = 0; i < grid_.cell_count(); ++i)
      if (mask_[i]) cells_.push_back(i);
    require(!cells_.empty(), "domain must contain at least one cell");
  }

  /// Whole grid as the domain.
  static GridDomain full(const GridSpec& grid) {
    return GridDomain(grid, CellMask(grid.cell_count(), 1));
  }

  const GridSpec& grid() const { return grid_; }
  const CellMask& mask() const { return mask_; }
  bool contains(int idx) const { return mask_[idx] != 0; }
  int cell_count() const { return static_cast<int>(cells_.size()); }
  /// Grid indices of the domain cells in increasing order.
  const std::vector<int>& cells() const { return cells_; }

  /// Same mask on a grid with a different spacing (origin scaled alike).
  GridDomain rescaled(double factor) const {
    GridSpec g = grid_;
    g.spacing *= factor;
    g.origin = {g.origin[0] * factor, g.origin[1] * factor};
    return GridDomain(g, mask_);
  }

  bool operator==(const GridDomain& o) const {
    return grid_ == o.grid_ && mask_ == o.mask_;
  }

 private:
  GridSpec grid_;
  CellMask mask_;
  std::vector<int> cells_;
};

enum class ShapeKind { Interval, Box, Ball, Annulus, MaskFile };

struct ShapeSpec {
  ShapeKind kind = ShapeKind::Ball;
  std::vector<double> center;       // one entry per axis
  std::vector<double> half_widths;  // interval / box
  double radius = 0.0;              // ball
  double inner_radius = 0.0;        // annulus
  double outer_radius = 0.0;        // annulus
  std::string path;                 // mask-file
};

inline ShapeSpec interval_shape(double lo, double hi) {
  ShapeSpec s;
  s.kind = ShapeKind::Interval;
  s.center = {0.5 * (lo + hi)};
  s.half_widths = {0.5 * (hi - lo)};
  return s;
}

inline ShapeSpec box_shape(Vec2 center, Vec2 half_widths) {
  ShapeSpec s;
  s.kind = ShapeKind::Box;
  s.center = {center[0], center[1]};
  s.half_widths = {half_widths[0], half_widths[1]};
  return s;
}

inline ShapeSpec ball_shape(std::vector<double> center, double radius) {
  ShapeSpec s;
  s.kind = ShapeKind::Ball;
  s.center = std::move(center);
  s.radius = radius;
  return s;
}

inline ShapeSpec annulus_shape(std::vector<double> center, double inner, double outer) {
  ShapeSpec s;
  s.kind = ShapeKind::Annulus;
  s.center = std::move(center);
  s.inner_radius = inner;
  s.outer_radius = outer;
  return s;
}

// ---------------------------------------------------------------------------
// Mask files: a header line "dim spacing origin..." followed by rows of 0/1.
// In 2D the first row is the top one (largest y), as in PGM images.

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline std::string write_mask_text(const GridDomain& d) {
  const auto& g = d.grid();
  std::ostringstream os;
  os << g.dim << ' ' << format_real(g.spacing) << ' ' << format_real(g.origin[0]);
  if (g.dim == 2) os << ' ' << format_real(g.origin[1]);
  os << '\n';
  for (int row = 0; row < g.cells[1]; ++row) {
    const int iy = g.cells[1] - 1 - row;
    for (int ix = 0; ix < g.cells[0]; ++ix) {
      if (ix) os << ' ';
      os << (d.contains(g.index(ix, iy)) ? '1' : '0');
    }
    os << '\n';
  }
  return os.str();
}

inline GridDomain read_mask_text(const std::string& text) {
  std::istringstream is(text);
  std::string header;
  require(static_cast<bool>(std::getline(is, header)), "mask file: missing header");
  std::istringstream hs(header);
  GridSpec g;
  require(static_cast<bool>(hs >> g.dim), "mask file: bad dim");
  require(g.dim == 1 || g.dim == 2, "mask file: dim must be 1 or 2");
  require(static_cast<bool>(hs >> g.spacing), "mask file: bad spacing");
  require(static_cast<bool>(hs >> g.origin[0]), "mask file: bad origin");
  if (g.dim == 2) require(static_cast<bool>(hs >> g.origin[1]), "mask file: bad origin");

  std::vector<std::vector<std::uint8_t>> rows;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::vector<std::uint8_t> row;
    std::string tok;
    while (ls >> tok) {
      require(tok == "0" || tok == "1", "mask file: entries must be 0 or 1");
      row.push_back(tok == "1");
    }
    if (!row.empty()) rows.push_back(std::move(row));
  }
  require(!rows.empty(), "mask file: no rows");
  require(g.dim == 2 || rows.size() == 1, "mask file: 1D mask must have one row");
  for (const auto& r : rows)
    require(r.size() == rows.front().size(), "mask file: ragged rows");
  g.cells = {static_cast<int>(rows.front().size()), static_cast<int>(rows.size())};
  g.validate();
  CellMask mask(g.cell_count(), 0);
  for (int row = 0; row < g.cells[1]; ++row) {
    const int iy = g.cells[1] - 1 - row;
    for (int ix = 0; ix < g.cells[0]; ++ix) mask[g.index(ix, iy)] = rows[row][ix];
  }
  return GridDomain(g, std::move(mask));
}

inline GridDomain load_mask_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), "cannot open mask file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return read_mask_text(ss.str());
}

inline void save_mask_file(const GridDomain& d, const std::string& path) {
  std::ofstream out(path);
  require(static_cast<bool>(out), "cannot write mask file: " + path);
  out << write_mask_text(d);
}

// ---------------------------------------------------------------------------

namespace detail {

inline Box shape_bounds(const ShapeSpec& s, int dim) {
  Box b;
  for (int k = 0; k < dim; ++k) {
    double ext = 0.0;
    switch (s.kind) {
      case ShapeKind::Interval:
      case ShapeKind::Box: ext = s.half_widths[k]; break;
      case ShapeKind::Ball: ext = s.radius; break;
      case ShapeKind::Annulus: ext = s.outer_radius; break;
      case ShapeKind::MaskFile: break;
    }
    b.lo[k] = s.center[k] - ext;
    b.hi[k] = s.center[k] + ext;
  }
  return b;
}

inline bool shape_contains(const ShapeSpec& s, const Vec2& x, int dim) {
  switch (s.kind) {
    case ShapeKind::Interval:
    case ShapeKind::Box:
      for (int k = 0; k < dim; ++k)
        if (std::abs(x[k] - s.center[k]) > s.half_widths[k]) return false;
      return true;
    case ShapeKind::Ball:
    case ShapeKind::Annulus: {
      double r2 = 0.0;
      for (int k = 0; k < dim; ++k) r2 += (x[k] - s.center[k]) * (x[k] - s.center[k]);
      if (s.kind == ShapeKind::Ball) return r2 <= s.radius * s.radius;
      return r2 >= s.inner_radius * s.inner_radius && r2 <= s.outer_radius * s.outer_radius;
    }
    case ShapeKind::MaskFile: break;
  }
  return false;
}

}  // namespace detail

/// Center-inclusion rasterization: a cell belongs to the domain iff its
/// center lies in the closed shape.
inline GridDomain rasterize(const ShapeSpec& shape, const GridSpec& grid) {
  grid.validate();
  if (shape.kind == ShapeKind::MaskFile) {
    GridDomain d = load_mask_file(shape.path);
    require(d.grid().dim == grid.dim && d.grid().cells == grid.cells,
            "mask file grid does not match the requested grid");
    return d;
  }
  const int dim = grid.dim;
  require(shape.center.size() >= static_cast<std::size_t>(dim),
          "shape center needs one coordinate per axis");
  switch (shape.kind) {
    case ShapeKind::Interval:
      require(dim == 1, "interval shape needs a 1D grid");
      [[fallthrough]];
    case ShapeKind::Box:
      require(shape.half_widths.size() >= static_cast<std::size_t>(dim),
              "box shape needs one half-width per axis");
      for (int k = 0; k < dim; ++k)
        require(shape.half_widths[k] > 0.0, "half-widths must be positive");
      break;
    case ShapeKind::Ball: require(shape.radius > 0.0, "ball radius must be positive"); break;
    case ShapeKind::Annulus:
      require(shape.inner_radius >= 0.0 && shape.outer_radius > shape.inner_radius,
              "annulus needs 0 <= inner < outer");
      break;
    case ShapeKind::MaskFile: break;
  }

  const Box sb = detail::shape_bounds(shape, dim);
  const Box gb = grid.bounds();
  const double slack = 1e-12 * grid.spacing;
  for (int k = 0; k < dim; ++k) {
    if (sb.lo[k] < gb.lo[k] - slack || sb.hi[k] > gb.hi[k] + slack) {
      std::ostringstream os;
      os << "shape extends outside the grid along axis " << k << ": shape ["
         << sb.lo[k] << ", " << sb.hi[k] << "] vs grid [" << gb.lo[k] << ", " << gb.hi[k]
         << "]";
      throw ConfigError(os.str());
    }
  }

  CellMask mask(grid.cell_count(), 0);
  for (int i = 0; i < grid.cell_count(); ++i)
    mask[i] = detail::shape_contains(shape, grid.center(i), dim) ? 1 : 0;
  require(count_set(mask) > 0, "shape covers no cell center");
  return GridDomain(grid, std::move(mask));
}

/// Lebesgue measure of a union of cells.
inline double measure(const GridSpec& grid, std::span<const std::uint8_t> mask) {
  return static_cast<double>(count_set(mask)) * grid.cell_volume();
}

inline double measure(const GridDomain& d) {
  return static_cast<double>(d.cell_count()) * d.grid().cell_volume();
}

/// Largest center distance plus one cell diagonal; an upper bound on the
/// diameter of the union of closed cells.
inline double diameter(const GridSpec& grid, std::span<const std::uint8_t> mask) {
  std::vector<Vec2> pts;
  for (int i = 0; i < grid.cell_count(); ++i)
    if (mask[i]) pts.push_back(grid.center(i));
  require(!pts.empty(), "diameter of an empty set");
  double best = 0.0;
  for (std::size_t a = 0; a < pts.size(); ++a)
    for (std::size_t b = a + 1; b < pts.size(); ++b) {
      const double dx = pts[a][0] - pts[b][0];
      const double dy = pts[a][1] - pts[b][1];
      best = std::max(best, dx * dx + dy * dy);
    }
  return std::sqrt(best) + grid.spacing * std::sqrt(static_cast<double>(grid.dim));
}

inline double diameter(const GridDomain& d) { return diameter(d.grid(), d.mask()); }

/// Number of faces separating the set from its complement (cells outside the
/// grid count as complement), times the face size spacing^(dim-1).
inline std::size_t boundary_face_count(const GridSpec& grid,
                                       std::span<const std::uint8_t> mask) {
  std::size_t faces = 0;
  auto member = [&](int ix, int iy) {
    return grid.in_grid(ix, iy) && mask[grid.index(ix, iy)] != 0;
  };
  for (int i = 0; i < grid.cell_count(); ++i) {
    if (!mask[i]) continue;
    const auto c = grid.coords(i);
    faces += !member(c[0] - 1, c[1]);
    faces += !member(c[0] + 1, c[1]);
    if (grid.dim == 2) {
      faces += !member(c[0], c[1] - 1);
      faces += !member(c[0], c[1] + 1);
    }
  }
  return faces;
}

inline double classical_perimeter(const GridSpec& grid, std::span<const std::uint8_t> mask) {
  require(count_set(mask) > 0, "perimeter of an empty set");
  return static_cast<double>(boundary_face_count(grid, mask)) *
         std::pow(grid.spacing, grid.dim - 1);
}

inline double classical_perimeter(const GridDomain& d) {
  return classical_perimeter(d.grid(), d.mask());
}

/// True when some cell of `set` shares a face with a cell outside `domain`
/// (or with the outside of the grid).
inline bool touches_domain_boundary(const GridDomain& domain,
                                    std::span<const std::uint8_t> set) {
  const auto& g = domain.grid();
  auto outside = [&](int ix, int iy) {
    return !g.in_grid(ix, iy) || !domain.contains(g.index(ix, iy));
  };
  for (int i = 0; i < g.cell_count(); ++i) {
    if (!set[i]) continue;
    const auto c = g.coords(i);
    if (outside(c[0] - 1, c[1]) || outside(c[0] + 1, c[1])) return true;
    if (g.dim == 2 && (outside(c[0], c[1] - 1) || outside(c[0], c[1] + 1))) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Poincare geometric constant: min over exterior balls B of
// diam(Omega u B)^(N + s p) / |B|, searched over balls tangent to the
// bounding box of Omega along each axis direction. The restricted family
// makes the result an upper bound of the constant.

namespace detail {

struct PoincareFamily {
  std::vector<Vec2> corners;  // corners of all domain cells
  double domain_diam = 0.0;
  int dim = 1;
  double exponent = 1.0;

  double value(const Vec2& center, double r) const {
    double far = 0.0;
    for (const auto& c : corners) {
      const double dx = c[0] - center[0];
      const double dy = c[1] - center[1];
      far = std::max(far, dx * dx + dy * dy);
    }
    const double diam = std::max({domain_diam, 2.0 * r, std::sqrt(far) + r});
    return std::pow(diam, exponent) / (unit_ball_volume(dim) * std::pow(r, dim));
  }
};

}  // namespace detail

inline double poincare_constant(const GridDomain& domain, double s, double p) {
  require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
  require(p >= 1.0 && std::isfinite(p), "p must be >= 1");
  const auto& g = domain.grid();
  detail::PoincareFamily fam;
  fam.dim = g.dim;
  fam.exponent = g.dim + s * p;
  fam.domain_diam = diameter(domain);

  Box bb{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
         {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (int i : domain.cells()) {
    const Box b = g.cell_box(i);
    for (int k = 0; k < g.dim; ++k) {
      bb.lo[k] = std::min(bb.lo[k], b.lo[k]);
      bb.hi[k] = std::max(bb.hi[k], b.hi[k]);
    }
    if (g.dim == 1) {
      fam.corners.push_back({b.lo[0], 0.0});
      fam.corners.push_back({b.hi[0], 0.0});
    } else {
      fam.corners.push_back({b.lo[0], b.lo[1]});
      fam.corners.push_back({b.hi[0], b.lo[1]});
      fam.corners.push_back({b.lo[0], b.hi[1]});
      fam.corners.push_back({b.hi[0], b.hi[1]});
    }
  }
  if (g.dim == 1) bb.lo[1] = bb.hi[1] = 0.0;
  const Vec2 mid{0.5 * (bb.lo[0] + bb.hi[0]), 0.5 * (bb.lo[1] + bb.hi[1])};
  const double extent = std::max(bb.hi[0] - bb.lo[0], bb.hi[1] - bb.lo[1]);

  double best = std::numeric_limits<double>::infinity();
  for (int axis = 0; axis < g.dim; ++axis) {
    for (int side : {-1, 1}) {
      auto center_for = [&](double r) {
        Vec2 c = mid;
        c[axis] = side > 0 ? bb.hi[axis] + r : bb.lo[axis] - r;
        return c;
      };
      auto f = [&](double logr) {
        const double r = std::exp(logr);
        return fam.value(center_for(r), r);
      };
      // Coarse log-scan to bracket, then golden section in log r.
      const double a0 = std::log(1e-3 * extent), b0 = std::log(1e3 * extent);
      constexpr int kScan = 120;
      int arg = 0;
      double fbest = std::numeric_limits<double>::infinity();
      for (int k = 0; k <= kScan; ++k) {
        const double v = f(a0 + (b0 - a0) * k / kScan);
        if (v < fbest) {
          fbest = v;
          arg = k;
        }
      }
      double a = a0 + (b0 - a0) * std::max(arg - 1, 0) / kScan;
      double b = a0 + (b0 - a0) * std::min(arg + 1, kScan) / kScan;
      const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
      double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
      double f1 = f(x1), f2 = f(x2);
      for (int it = 0; it < 200 && (b - a) > 1e-13; ++it) {
        if (f1 < f2) {
          b = x2;
          x2 = x1;
          f2 = f1;
          x1 = b - invphi * (b - a);
          f1 = f(x1);
        } else {
          a = x1;
          x1 = x2;
          f1 = f2;
          x2 = a + invphi * (b - a);
          f2 = f(x2);
        }
      }
      best = std::min({best, fbest, f1, f2});
    }
  }
  return best;
}

}  // namespace fcheeger

#endif  // FCHEEGER_GEOMETRY_HPP
