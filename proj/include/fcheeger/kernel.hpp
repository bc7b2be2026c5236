#ifndef FCHEEGER_KERNEL_HPP
#define FCHEEGER_KERNEL_HPP

// Riesz-kernel interaction weights between grid cells,
//
//   W(i, j) = int_{C_i} int_{C_j} |x - y|^(-alpha) dx dy,  alpha = N + s p,
//
// tabulated by integer cell offset. Everything is computed for unit spacing
// and multiplied by spacing^(2N - alpha); the change of variables makes this
// exact.
//
// The 1D weights are the second difference of the double antiderivative of
// t^(-alpha). In 2D the double cell integral collapses to
//
//   W(d) = int_{R^2} |z|^(-alpha) tri(z_x - d_x) tri(z_y - d_y) dz,
//
// with tri(t) = max(0, 1 - |t|) the overlap length of two unit intervals.
// The support splits into rectangles on which the weight is bilinear. Pieces
// with the origin at a corner are integrated in polar coordinates with the
// radial integral in closed form; the remaining pieces are smooth and get
// tensor Gauss-Legendre.
//
// The truncated table carries a tail: the exact interaction of one cell with
// everything outside the tabulated offsets, obtained as the full cell-to-
// complement interaction minus the tabulated sum.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "fcheeger/common.hpp"
#include "fcheeger/geometry.hpp"
#include "fcheeger/quadrature.hpp"

namespace fcheeger {

struct KernelParams {
  int dim = 1;
  double s = 0.5;
  double p = 1.0;
  /// Length units. A value <= 0 means "cover the whole grid".
  double truncation_radius = 0.0;
  /// Dyadic refinement depth of the near-field quadrature.
  int near_field_levels = 1;

  double alpha() const { return dim + s * p; }

  void validate() const {
    require(dim == 1 || dim == 2, "kernel dim must be 1 or 2");
    require(s > 0.0 && s < 1.0, "s must lie in (0,1)");
    require(p >= 1.0 && std::isfinite(p), "p must be >= 1");
    // Piecewise-constant fields with a jump have finite energy only for
    // s p < 1; beyond that adjacent-cell weights diverge.
    require(s * p < 1.0, "s*p must be < 1 (adjacent-cell weights diverge otherwise)");
    require(near_field_levels >= 0 && near_field_levels <= 6,
            "near_field_levels must lie in [0,6]");
  }
};

namespace detail {

// -- 1D ---------------------------------------------------------------------

/// Second central difference of t^beta at integer k >= 1 (with 0^beta = 0).
inline double second_difference_pow(double beta, long k) {
  if (k >= 16) {
    // 2 * sum_m [beta]_{2m} / (2m)! * k^(beta - 2m)
    const double kk = static_cast<double>(k);
    const double inv2 = 1.0 / (kk * kk);
    double term = 1.0;  // [beta]_{2m} / (2m)! accumulated
    double pw = 1.0;
    double acc = 0.0;
    for (int m = 1; m <= 12; ++m) {
      term *= (beta - (2 * m - 2)) * (beta - (2 * m - 1)) / ((2.0 * m - 1.0) * (2.0 * m));
      pw *= inv2;
      const double add = term * pw;
      acc += add;
      if (std::abs(add) < 1e-18 * std::abs(acc)) break;
    }
    return 2.0 * std::pow(kk, beta) * acc;
  }
  auto f = [beta](long t) { return t == 0 ? 0.0 : std::pow(static_cast<double>(t), beta); };
  return f(k + 1) - 2.0 * f(k) + f(k - 1);
}

inline double unit_weight_1d(double alpha, long k) {
  k = k < 0 ? -k : k;
  const double beta = 2.0 - alpha;
  return second_difference_pow(beta, k) / ((1.0 - alpha) * beta);
}

inline double unit_complement_1d(double alpha) {
  return 2.0 / ((alpha - 1.0) * (2.0 - alpha));
}

// -- 2D ---------------------------------------------------------------------

struct LinearFactor {
  double a, b;  // a + b t
};

/// int over [0,X]x[0,Y] of |z|^(-alpha) (b x + c y + d x y): origin at the
/// corner and no constant term.
inline double corner_piece_polar(double alpha, double X, double Y, double b, double c, double d,
                                 int panels) {
  const auto& rule = gauss_rule(20);
  const double e3 = 3.0 - alpha, e4 = 4.0 - alpha;
  auto radial = [&](double th, double R) {
    const double ct = std::cos(th), st = std::sin(th);
    return (b * ct + c * st) * std::pow(R, e3) / e3 + d * ct * st * std::pow(R, e4) / e4;
  };
  const double split = std::atan2(Y, X);
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double a0 = split * k / panels, a1 = split * (k + 1) / panels;
    acc += rule.integrate([&](double th) { return radial(th, X / std::cos(th)); }, a0, a1);
    const double b0 = split + (0.5 * std::numbers::pi - split) * k / panels;
    const double b1 = split + (0.5 * std::numbers::pi - split) * (k + 1) / panels;
    acc += rule.integrate([&](double th) { return radial(th, Y / std::sin(th)); }, b0, b1);
  }
  return acc;
}

/// int over [x0,x1]x[y0,y1] of |z|^(-alpha) wx(x) wy(y), origin outside.
inline double smooth_piece_gauss(double alpha, double x0, double x1, double y0, double y1,
                                 LinearFactor wx, LinearFactor wy, int order, int splits) {
  const auto& rule = gauss_rule(order);
  const double hx = (x1 - x0) / splits, hy = (y1 - y0) / splits;
  double acc = 0.0;
  for (int i = 0; i < splits; ++i) {
    for (int j = 0; j < splits; ++j) {
      const double ax = x0 + i * hx, ay = y0 + j * hy;
      double sub = 0.0;
      for (std::size_t u = 0; u < rule.nodes.size(); ++u) {
        const double x = ax + 0.5 * hx * (1.0 + rule.nodes[u]);
        double row = 0.0;
        for (std::size_t v = 0; v < rule.nodes.size(); ++v) {
          const double y = ay + 0.5 * hy * (1.0 + rule.nodes[v]);
          row += rule.weights[v] * (wy.a + wy.b * y) * std::pow(x * x + y * y, -0.5 * alpha);
        }
        sub += rule.weights[u] * (wx.a + wx.b * x) * row;
      }
      acc += sub * 0.25 * hx * hy;
    }
  }
  return acc;
}

struct Segment {
  double lo, hi;
  LinearFactor w;
};

/// Linear pieces of tri(t - d), split at 0 when 0 lies strictly inside.
inline std::vector<Segment> tent_segments(double d) {
  std::vector<Segment> raw{{d - 1.0, d, {1.0 - d, 1.0}}, {d, d + 1.0, {1.0 + d, -1.0}}};
  std::vector<Segment> out;
  for (const auto& seg : raw) {
    if (seg.lo < 0.0 && seg.hi > 0.0) {
      out.push_back({seg.lo, 0.0, seg.w});
      out.push_back({0.0, seg.hi, seg.w});
    } else {
      out.push_back(seg);
    }
  }
  return out;
}

inline double unit_weight_2d(double alpha, int dx, int dy, int levels) {
  const int adx = std::abs(dx), ady = std::abs(dy);
  const int cheb = std::max(adx, ady);
  const auto xs = tent_segments(static_cast<double>(adx));
  const auto ys = tent_segments(static_cast<double>(ady));
  const int panels = 1 << levels;
  double acc = 0.0;
  for (const auto& sx : xs) {
    for (const auto& sy : ys) {
      const bool corner_x = sx.lo == 0.0 || sx.hi == 0.0;
      const bool corner_y = sy.lo == 0.0 || sy.hi == 0.0;
      if (corner_x && corner_y) {
        // Reflect into the first quadrant: t -> -t flips the slope sign.
        LinearFactor fx = sx.w, fy = sy.w;
        double X = sx.hi - sx.lo, Y = sy.hi - sy.lo;
        if (sx.hi == 0.0) fx.b = -fx.b;
        if (sy.hi == 0.0) fy.b = -fy.b;
        // Constant term must vanish (no overlap between distinct cells).
        const double b = fx.b * fy.a, c = fx.a * fy.b, d = fx.b * fy.b;
        acc += corner_piece_polar(alpha, X, Y, b, c, d, panels);
      } else {
        const double gap = std::max(std::min(std::abs(sx.lo), std::abs(sx.hi)),
                                    std::min(std::abs(sy.lo), std::abs(sy.hi)));
        int order = 7, splits = 1;
        if (cheb <= 2) {
          order = 15;
          splits = panels;
        } else if (gap < 8.0) {
          order = 10;
        }
        acc += smooth_piece_gauss(alpha, sx.lo, sx.hi, sy.lo, sy.hi, sx.w, sy.w, order, splits);
      }
    }
  }
  return acc;
}

/// int_{C}int_{R^2 \ C} |x-y|^(-alpha) for the unit square C.
inline double unit_complement_2d(double alpha, int levels) {
  const auto& rule = gauss_rule(20);
  const int panels = 1 << levels;
  const double e2 = alpha - 2.0, e3 = 3.0 - alpha, e4 = 4.0 - alpha;
  auto f = [&](double th) {
    const double c = std::cos(th), s = std::sin(th);
    const double R = 1.0 / c;
    return (c + s) * std::pow(R, e3) / e3 - c * s * std::pow(R, e4) / e4 + std::pow(R, -e2) / e2;
  };
  const double q = 0.25 * std::numbers::pi;
  double acc = 0.0;
  for (int k = 0; k < panels; ++k) acc += rule.integrate(f, q * k / panels, q * (k + 1) / panels);
  return 8.0 * acc;
}

}  // namespace detail

/// Interaction of two distinct cells at integer offset, spacing h.
inline double cell_pair_weight(const KernelParams& params, Offset offset, double spacing) {
  params.validate();
  require(spacing > 0.0, "spacing must be > 0");
  if (params.dim == 1) require(offset[1] == 0, "1D offsets have no second component");
  require(offset[0] != 0 || offset[1] != 0, "zero offset has no pair weight");
  const double alpha = params.alpha();
  const double unit = params.dim == 1
                          ? detail::unit_weight_1d(alpha, offset[0])
                          : detail::unit_weight_2d(alpha, offset[0], offset[1],
                                                   params.near_field_levels);
  return unit * std::pow(spacing, 2 * params.dim - alpha);
}

/// L(C, R^N \ C) for a single cell C of side h.
inline double cell_complement_interaction(const KernelParams& params, double spacing) {
  params.validate();
  const double alpha = params.alpha();
  const double unit = params.dim == 1
                          ? detail::unit_complement_1d(alpha)
                          : detail::unit_complement_2d(alpha, params.near_field_levels);
  return unit * std::pow(spacing, 2 * params.dim - alpha);
}

/// Radially averaged far field: per cell of volume h^N, the integral of the
/// kernel over |y - x| > R, i.e. N omega_N R^(N - alpha) / (alpha - N) * h^N.
inline double radial_tail_estimate(const KernelParams& params, double radius, double spacing) {
  const double alpha = params.alpha();
  const int n = params.dim;
  return n * unit_ball_volume(n) * std::pow(radius, n - alpha) / (alpha - n) *
         std::pow(spacing, n);
}

/// Immutable table of pair weights by offset, plus the far-field tail.
class KernelTable {
 public:
  KernelTable() = default;

  const KernelParams& params() const { return params_; }
  double spacing() const { return spacing_; }
  double truncation_radius() const { return params_.truncation_radius; }
  /// spacing^(2N - alpha)
  double scale() const { return scale_; }
  int reach(int axis) const { return reach_[axis]; }

  bool has(int dx, int dy) const { return unit_weight(dx, dy) > 0.0; }

  /// Unit-spacing weight; zero for the zero offset and offsets beyond R.
  double unit_weight(int dx, int dy) const {
    if (dx < -reach_[0] || dx > reach_[0] || dy < -reach_[1] || dy > reach_[1]) return 0.0;
    return unit_[static_cast<std::size_t>(dy + reach_[1]) * (2 * reach_[0] + 1) + (dx + reach_[0])];
  }
  double weight(int dx, int dy) const { return scale_ * unit_weight(dx, dy); }
  double weight(Offset o) const { return weight(o[0], o[1]); }

  /// Unit-spacing interaction of one cell with everything beyond the table.
  double unit_tail() const { return unit_tail_; }
  double tail() const { return scale_ * unit_tail_; }
  /// Unit-spacing L(C, R^N \ C).
  double unit_cell_complement() const { return unit_complement_; }
  double cell_complement() const { return scale_ * unit_complement_; }

  /// All tabulated offsets, row-major.
  std::vector<Offset> offsets() const {
    std::vector<Offset> out;
    for (int dy = -reach_[1]; dy <= reach_[1]; ++dy)
      for (int dx = -reach_[0]; dx <= reach_[0]; ++dx)
        if (has(dx, dy)) out.push_back({dx, dy});
    return out;
  }

  const std::vector<double>& raw_unit_weights() const { return unit_; }

  bool operator==(const KernelTable&) const = default;

 private:
  friend KernelTable build_table(const KernelParams&, const GridSpec&);
  friend KernelTable table_from_raw(const KernelParams&, double, std::array<int, 2>,
                                    std::vector<double>, double, double);

  KernelParams params_;
  double spacing_ = 1.0;
  double scale_ = 1.0;
  std::array<int, 2> reach_{0, 0};
  std::vector<double> unit_;
  double unit_tail_ = 0.0;
  double unit_complement_ = 0.0;
};

/// Rebuild a table from serialized fields (used by the binary cache).
inline KernelTable table_from_raw(const KernelParams& params, double spacing,
                                  std::array<int, 2> reach, std::vector<double> unit,
                                  double unit_tail, double unit_complement) {
  KernelTable t;
  t.params_ = params;
  t.spacing_ = spacing;
  t.scale_ = std::pow(spacing, 2 * params.dim - params.alpha());
  t.reach_ = reach;
  t.unit_ = std::move(unit);
  t.unit_tail_ = unit_tail;
  t.unit_complement_ = unit_complement;
  return t;
}

/// Truncation radius covering every cell pair of the grid (at least 3 cells).
inline double covering_radius(const GridSpec& grid) {
  const double nx = grid.cells[0], ny = grid.dim == 2 ? grid.cells[1] : 0.0;
  return std::max(std::sqrt(nx * nx + ny * ny) + 1.0, 3.0) * grid.spacing;
}

inline KernelTable build_table(const KernelParams& params_in, const GridSpec& grid) {
  KernelParams params = params_in;
  params.validate();
  grid.validate();
  require(params.dim == grid.dim, "kernel dim does not match grid dim");
  if (params.truncation_radius <= 0.0) params.truncation_radius = covering_radius(grid);
  const double h = grid.spacing;
  const double R = params.truncation_radius;
  require(R >= 3.0 * h * (1.0 - 1e-12), "truncation_radius must be >= 3 * spacing");

  KernelTable t;
  t.params_ = params;
  t.spacing_ = h;
  t.scale_ = std::pow(h, 2 * params.dim - params.alpha());
  const double rc = R / h * (1.0 + 1e-12);
  const int reach = static_cast<int>(std::floor(rc));
  t.reach_ = {reach, params.dim == 2 ? reach : 0};
  const int wx = 2 * t.reach_[0] + 1, wy = 2 * t.reach_[1] + 1;
  t.unit_.assign(static_cast<std::size_t>(wx) * wy, 0.0);

  const double alpha = params.alpha();
  // Canonical offsets 0 <= dy <= dx; the rest follows by symmetry.
  for (int dx = 0; dx <= t.reach_[0]; ++dx) {
    for (int dy = 0; dy <= std::min(dx, t.reach_[1]); ++dy) {
      if (dx == 0 && dy == 0) continue;
      if (static_cast<double>(dx) * dx + static_cast<double>(dy) * dy > rc * rc) continue;
      const double w = params.dim == 1
                           ? detail::unit_weight_1d(alpha, dx)
                           : detail::unit_weight_2d(alpha, dx, dy, params.near_field_levels);
      const int sx[2] = {dx, -dx}, sy[2] = {dy, -dy};
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const int ox = sx[a], oy = sy[b];
          if (std::abs(oy) > t.reach_[1]) continue;
          t.unit_[static_cast<std::size_t>(oy + t.reach_[1]) * wx + (ox + t.reach_[0])] = w;
          if (params.dim == 2)
            t.unit_[static_cast<std::size_t>(ox + t.reach_[1]) * wx + (oy + t.reach_[0])] = w;
        }
    }
  }
  t.unit_complement_ = params.dim == 1
                           ? detail::unit_complement_1d(alpha)
                           : detail::unit_complement_2d(alpha, params.near_field_levels);
  t.unit_tail_ = t.unit_complement_ - pairwise_sum(t.unit_);
  return t;
}

// ---------------------------------------------------------------------------
// Interactions between cell sets on a grid.

inline void check_table_grid(const KernelTable& table, const GridSpec& grid) {
  require(table.params().dim == grid.dim, "table/grid dimension mismatch");
  require(table.spacing() == grid.spacing, "table/grid spacing mismatch");
}

/// L(A, B) = sum_{i in A, j in B} W(i - j) for disjoint cell sets.
inline double interaction(const KernelTable& table, const GridSpec& grid,
                          std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  check_table_grid(table, grid);
  require(a.size() == b.size() && a.size() == static_cast<std::size_t>(grid.cell_count()),
          "cell set size does not match grid");
  std::vector<int> ia, ib;
  for (int i = 0; i < grid.cell_count(); ++i) {
    require(!(a[i] && b[i]), "interaction needs disjoint sets");
    if (a[i]) ia.push_back(i);
    if (b[i]) ib.push_back(i);
  }
  std::vector<double> rows(ia.size(), 0.0);
  std::vector<double> buf(ib.size());
  for (std::size_t r = 0; r < ia.size(); ++r) {
    const auto ci = grid.coords(ia[r]);
    for (std::size_t k = 0; k < ib.size(); ++k) {
      const auto cj = grid.coords(ib[k]);
      buf[k] = table.unit_weight(cj[0] - ci[0], cj[1] - ci[1]);
    }
    rows[r] = pairwise_sum(buf);
  }
  return table.scale() * pairwise_sum(rows);
}

/// Per-cell unit-spacing interaction with the complement of X:
/// L(C_i, R^N \ X) for each i in X (listed in increasing grid index).
inline std::vector<double> unit_exterior_per_cell(const KernelTable& table, const GridSpec& grid,
                                                  std::span<const std::uint8_t> x) {
  check_table_grid(table, grid);
  std::vector<int> idx;
  for (int i = 0; i < grid.cell_count(); ++i)
    if (x[i]) idx.push_back(i);
  std::vector<double> out(idx.size());
  std::vector<double> buf(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const auto ci = grid.coords(idx[r]);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      const auto cj = grid.coords(idx[k]);
      buf[k] = table.unit_weight(cj[0] - ci[0], cj[1] - ci[1]);
    }
    out[r] = table.unit_cell_complement() - pairwise_sum(buf);
  }
  return out;
}

/// L(A, R^N \ X) for A contained in X; the unbounded part comes from the tail.
inline double exterior_interaction(const KernelTable& table, const GridSpec& grid,
                                   std::span<const std::uint8_t> a,
                                   std::span<const std::uint8_t> x) {
  require(a.size() == x.size() && a.size() == static_cast<std::size_t>(grid.cell_count()),
          "cell set size does not match grid");
  for (std::size_t i = 0; i < a.size(); ++i)
    require(!a[i] || x[i], "exterior_interaction needs A inside X");
  const auto ext = unit_exterior_per_cell(table, grid, x);
  std::vector<double> picked;
  std::size_t r = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!x[i]) continue;
    if (a[i]) picked.push_back(ext[r]);
    ++r;
  }
  return table.scale() * pairwise_sum(picked);
}

/// A kernel table restricted to one domain: unit pair weights between the
/// domain cells (by position in domain.cells()) and each cell's unit
/// interaction with the complement of the domain, tail included.
class Coupling {
 public:
  Coupling(const KernelTable& table, const GridDomain& domain)
      : table_(&table), grid_(domain.grid()), cells_(domain.cells()) {
    check_table_grid(table, grid_);
    for (int c : cells_) coords_.push_back(grid_.coords(c));
    exterior_ = unit_exterior_per_cell(table, grid_, domain.mask());
  }

  int size() const { return static_cast<int>(cells_.size()); }
  const std::vector<int>& cells() const { return cells_; }
  const GridSpec& grid() const { return grid_; }
  const KernelTable& table() const { return *table_; }
  double scale() const { return table_->scale(); }
  double cell_volume() const { return grid_.cell_volume(); }

  double unit_weight(int a, int b) const {
    return table_->unit_weight(coords_[b][0] - coords_[a][0], coords_[b][1] - coords_[a][1]);
  }
  /// Unit L(C_a, R^N \ Omega).
  double unit_exterior(int a) const { return exterior_[a]; }
  const std::vector<double>& unit_exterior() const { return exterior_; }

 private:
  const KernelTable* table_;
  GridSpec grid_;
  std::vector<int> cells_;
  std::vector<Offset> coords_;
  std::vector<double> exterior_;
};

}  // namespace fcheeger

#endif  // FCHEEGER_KERNEL_HPP
