#ifndef FCHEEGER_VERIFY_HPP
#define FCHEEGER_VERIFY_HPP

// Property suites over randomized instances. Every check records its worst
// margin (>= 0 means the property held with that much room).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fcheeger/cheeger.hpp"
#include "fcheeger/common.hpp"
#include "fcheeger/eigenvalue.hpp"
#include "fcheeger/functional.hpp"
#include "fcheeger/geometry.hpp"
#include "fcheeger/kernel.hpp"

namespace fcheeger {

struct CheckItem {
  std::string suite;
  std::string name;
  bool passed = false;
  double margin = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckItem> items;
  bool passed() const {
    return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.passed; });
  }
};

struct VerifyOptions {
  int trials = 1000;
  std::uint64_t seed = 12345;
};

inline const std::vector<std::string>& verify_suites() {
  static const std::vector<std::string> names{"pointwise",     "coarea", "interpolation",
                                              "isoperimetric", "cheeger", "duality",
                                              "eigen"};
  return names;
}

namespace detail {

/// Worst margin tracker: margin = allowed - observed.
struct Tally {
  double worst = std::numeric_limits<double>::infinity();
  int count = 0;
  std::string where;
  void add(double margin, const std::string& label = {}) {
    ++count;
    if (margin < worst) {
      worst = margin;
      where = label;
    }
  }
  CheckItem item(const std::string& suite, const std::string& name) const {
    std::ostringstream os;
    os << count << " cases";
    if (!where.empty()) os << ", worst at " << where;
    return {suite, name, count > 0 && worst >= 0.0, worst, os.str()};
  }
};

inline KernelTable table_for(const GridSpec& g, double s, double p) {
  KernelParams kp;
  kp.dim = g.dim;
  kp.s = s;
  kp.p = p;
  return build_table(kp, g);
}

inline CellMask random_mask(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution coin(density);
  CellMask m(n);
  for (auto& x : m) x = coin(rng) ? 1 : 0;
  if (count_set(m) == 0) m[rng() % n] = 1;
  return m;
}

/// Exhaustive minimum of P/|E| over nonempty subsets of a model with at most
/// 20 cells; ties resolved toward the union of all minimizers.
struct BruteCheeger {
  double h = 0.0;
  std::vector<std::uint8_t> in;
};

inline BruteCheeger brute_force_cheeger(const CutModel& m) {
  const int n = m.size();
  require(n >= 1 && n <= 20, "brute force needs 1..20 cells");
  const std::uint32_t full = (1u << n) - 1;
  std::vector<double> ratio(full + 1, 0.0);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::uint8_t> in(n);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    for (int a = 0; a < n; ++a) in[a] = (mask >> a) & 1u;
    const double r = m.perimeter(in) / (std::popcount(mask) * m.cell_volume);
    ratio[mask] = r;
    best = std::min(best, r);
  }
  std::uint32_t uni = 0;
  for (std::uint32_t mask = 1; mask <= full; ++mask)
    if (ratio[mask] <= best * (1.0 + 1e-12)) uni |= mask;
  BruteCheeger out{best, std::vector<std::uint8_t>(n)};
  for (int a = 0; a < n; ++a) out.in[a] = (uni >> a) & 1u;
  return out;
}

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

// ---------------------------------------------------------------------------

inline void suite_pointwise(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> val(0.0, 5.0), pd(1.0, 4.0), bd(1.0, 6.0);
  Tally c1, c2;
  for (int t = 0; t < o.trials; ++t) {
    double a = val(rng), b = val(rng);
    if (t % 10 == 0) b = a * (1.0 + 1e-6 * (val(rng) - 2.5));  // near-diagonal pairs
    const double p = std::max(pd(rng), 1.0 + 1e-9), beta = bd(rng), m = val(rng);
    const auto r1 = pointwise_ineq_C1(a, b, p, beta);
    c1.add(r1.lhs - r1.rhs + 1e-12 * std::max(1.0, std::abs(r1.lhs)));
    const auto r2 = pointwise_ineq_C2(a, b, m, p, beta);
    c2.add(r2.lhs - r2.rhs + 1e-12 * std::max(1.0, std::abs(r2.lhs)));
  }
  rep.items.push_back(c1.item("pointwise", "C1 lhs >= rhs"));
  rep.items.push_back(c2.item("pointwise", "C2 lhs >= rhs"));
}

inline void suite_coarea(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 1);
  const std::vector<GridSpec> grids{make_grid_1d(10, 0.1), make_grid_2d(5, 5, 0.2)};
  const std::vector<double> ss{0.3, 0.5, 0.8};
  std::vector<KernelTable> tables;
  for (const auto& g : grids)
    for (double s : ss) tables.push_back(table_for(g, s, 1.0));
  std::uniform_real_distribution<double> lev(0.0, 3.0);
  Tally gap;
  for (int t = 0; t < o.trials; ++t) {
    const std::size_t gi = t % grids.size();
    const KernelTable& tab = tables[gi * ss.size() + (t / grids.size()) % ss.size()];
    const GridDomain d(grids[gi], random_mask(rng, grids[gi].cell_count(), 0.7));
    const int nlev = 1 + static_cast<int>(rng() % 5);
    std::vector<double> levels(nlev);
    for (auto& x : levels) x = lev(rng);
    levels[0] = 0.0;
    std::vector<double> v(d.cell_count());
    for (auto& x : v) x = levels[rng() % nlev];
    const auto r = coarea_check(ScalarField(d, v), tab);
    gap.add(1e-10 * std::max(r.lhs, 1e-300) - std::abs(r.gap),
            "trial " + std::to_string(t));
  }
  rep.items.push_back(gap.item("coarea", "|gap| <= 1e-10 lhs"));
}

inline void suite_interpolation(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 2);
  Tally sharp, bound;
  for (double s : {0.25, 0.5, 0.75}) {
    for (int n : {1, 4, 16}) {
      const auto g = make_grid_1d(n, 1.0 / n);
      const auto tab = table_for(g, s, 1.0);
      const CellMask all(n, 1);
      const auto r = interpolation_bound(g, all, tab);
      sharp.add(1e-3 - std::abs(r.ratio - 1.0), "s=" + fmt(s) + " n=" + std::to_string(n));
    }
  }
  const std::vector<GridSpec> grids{make_grid_1d(16, 1.0 / 16), make_grid_2d(8, 8, 0.125)};
  for (const auto& g : grids) {
    for (double s : {0.25, 0.5, 0.75}) {
      const auto tab = table_for(g, s, 1.0);
      const int per = std::max(1, o.trials / 6);
      for (int t = 0; t < per; ++t) {
        const auto m = random_mask(rng, g.cell_count(), 0.1 + 0.8 * (t % 9) / 8.0);
        const auto r = interpolation_bound(g, m, tab);
        bound.add(1e-6 - (r.ratio - 1.0), "dim " + std::to_string(g.dim) + " s=" + fmt(s));
      }
    }
  }
  rep.items.push_back(sharp.item("interpolation", "single interval ratio = 1 +- 1e-3"));
  rep.items.push_back(bound.item("interpolation", "ratio <= 1 + 1e-6"));
}

inline void suite_isoperimetric(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 3);
  const auto g = make_grid_2d(16, 16, 1.0 / 16);
  Tally def;
  for (double s : {0.3, 0.5, 0.8}) {
    const auto tab = table_for(g, s, 1.0);
    const double ref = ball_isoperimetric_constant(2, s);
    const int per = std::max(1, o.trials / 3);
    for (int t = 0; t < per; ++t) {
      const auto m = random_mask(rng, g.cell_count(), 0.05 + 0.9 * (t % 10) / 9.0);
      const double d = isoperimetric_deficit(g, m, tab, ref);
      def.add(d + 1e-6 * s_perimeter(g, m, tab), "s=" + fmt(s));
    }
  }
  rep.items.push_back(def.item("isoperimetric", "deficit >= -1e-6 P_s"));
}

/// Small Cheeger instances: intervals, rectangles and random masks.
inline std::vector<GridDomain> small_domains(std::mt19937_64& rng, int masks) {
  std::vector<GridDomain> out;
  for (int n : {1, 2, 3, 5, 8, 12}) out.push_back(GridDomain::full(make_grid_1d(n, 1.0 / n)));
  for (auto [a, b] : {std::pair{2, 2}, {2, 3}, {3, 3}, {2, 5}})
    out.push_back(GridDomain::full(make_grid_2d(a, b, 0.25)));
  for (int k = 0; k < masks; ++k) {
    const auto g = make_grid_2d(4, 3, 0.25);
    out.emplace_back(g, random_mask(rng, g.cell_count(), 0.6));
  }
  return out;
}

inline void suite_cheeger(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 4);
  Tally brute_h, brute_set, recompute, contact, scaling, h1bound, calib;
  const auto doms = small_domains(rng, std::clamp(o.trials / 100, 2, 10));
  for (double s : {0.3, 0.5, 0.8}) {
    for (std::size_t k = 0; k < doms.size(); ++k) {
      const auto& d = doms[k];
      const std::string where = "domain " + std::to_string(k) + " s=" + fmt(s);
      const auto tab = table_for(d.grid(), s, 1.0);
      const auto model = nonlocal_model(tab, d);
      const auto r = solve_cut_ratio(model);
      const auto bf = brute_force_cheeger(model);
      brute_h.add(1e-10 - std::abs(r.h - bf.h) / bf.h, where);
      brute_set.add(model.positions_of(r.optimal_set) == bf.in ? 0.0 : -1.0, where);
      const double again = s_perimeter(d.grid(), r.optimal_set, tab) /
                           measure(d.grid(), r.optimal_set);
      recompute.add(1e-8 - std::abs(again - r.h) / r.h, where);
      contact.add(touches_domain_boundary(d, r.optimal_set) ? 0.0 : -1.0, where);
      const auto d2 = d.rescaled(2.0);
      const auto r2 = solve_cheeger(d2, table_for(d2.grid(), s, 1.0));
      scaling.add(1e-10 - std::abs(r2.h / r.h / std::pow(2.0, -s) - 1.0), where);
      const auto hb = hs_vs_h1(d, tab);
      h1bound.add((hb.bound - hb.hs) / hb.bound + 1e-12, where);  // equality for intervals
      if (d.grid().dim == 1 && d.cell_count() == static_cast<int>(d.grid().cell_count()))
        calib.add(r.calibrable ? 0.0 : -1.0, where);
    }
  }
  rep.items.push_back(brute_h.item("cheeger", "h = brute force to 1e-10"));
  rep.items.push_back(brute_set.item("cheeger", "set = maximal brute-force minimizer"));
  rep.items.push_back(recompute.item("cheeger", "h = P_s(E)/|E| to 1e-8"));
  rep.items.push_back(contact.item("cheeger", "optimal set touches the domain boundary"));
  rep.items.push_back(scaling.item("cheeger", "h(2 spacing) = 2^-s h to 1e-10"));
  rep.items.push_back(h1bound.item("cheeger", "h_s <= C h_1^s (1e-12 relative slack)"));
  rep.items.push_back(calib.item("cheeger", "intervals are calibrable"));
}

inline void suite_duality(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 5);
  Tally sup, flow, resid, weak;
  const auto doms = small_domains(rng, std::clamp(o.trials / 100, 2, 10));
  std::vector<GridDomain> all = doms;
  all.push_back(GridDomain::full(make_grid_2d(12, 12, 1.0 / 12)));
  all.push_back(rasterize(ball_shape({0.0, 0.0}, 1.0), make_grid_2d(14, 14, 1.0 / 7, {-1, -1})));
  for (double s : {0.3, 0.5, 0.8}) {
    for (std::size_t k = 0; k < all.size(); ++k) {
      const auto& d = all[k];
      const std::string where = "domain " + std::to_string(k) + " s=" + fmt(s);
      const auto model = nonlocal_model(table_for(d.grid(), s, 1.0), d);
      const auto r = solve_cut_ratio(model);
      const auto& c = r.certificate;
      sup.add(1e-8 - std::abs(c.phi_sup_norm * r.h - 1.0), where);
      flow.add(1e-9 - std::abs(c.flow_value - c.cut_capacity) / c.cut_capacity, where);
      resid.add(1e-8 - c.residual, where);
      const int per = std::max(1, o.trials / 10);
      for (int t = 0; t < per; ++t) {
        auto in = random_mask(rng, model.size(), 0.1 + 0.8 * (t % 5) / 4.0);
        const auto [flux, bound] = certify_subset(model, r, in);
        const double vol = count_set(in) * model.cell_volume;
        weak.add(1e-9 * bound - std::max(r.h * vol - model.perimeter(in), flux - bound), where);
      }
    }
  }
  rep.items.push_back(sup.item("duality", "sup|phi| h = 1 to 1e-8"));
  rep.items.push_back(flow.item("duality", "flow = cut to 1e-9"));
  rep.items.push_back(resid.item("duality", "divergence identity to 1e-8"));
  rep.items.push_back(weak.item("duality", "h|A| <= P_s(A) through phi"));
}

inline void suite_eigen(VerifyReport& rep, const VerifyOptions& o) {
  std::mt19937_64 rng(o.seed + 6);
  Tally poinc, absq, scal, el2, trace, norm, recomp, nik;
  struct Case {
    GridDomain d;
    double s, p;
  };
  const std::vector<Case> cases{
      {GridDomain::full(make_grid_1d(1, 1.0)), 0.5, 1.5},
      {GridDomain::full(make_grid_1d(6, 1.0 / 6)), 0.45, 2.0},
      {GridDomain::full(make_grid_1d(8, 1.0 / 8)), 0.3, 1.5},
      {GridDomain::full(make_grid_2d(5, 5, 0.2)), 0.45, 2.0},
      {GridDomain::full(make_grid_2d(4, 6, 0.25)), 0.3, 1.5},
  };
  EigenOptions eo;
  eo.random_starts = 2;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& [d, s, p] = cases[k];
    const std::string where = "case " + std::to_string(k);
    const auto tab = table_for(d.grid(), s, p);
    const auto r = solve_eigen(d, tab, o.seed + k, eo);
    poinc.add((r.lambda - 1.0 / poincare_constant(d, s, p)) / r.lambda, where);
    norm.add(1e-12 - std::abs(r.field.lp_norm_p(p) - 1.0), where);
    recomp.add(1e-10 - std::abs(seminorm(r.field, tab) / r.lambda - 1.0), where);
    double worst_trace = 0.0;
    for (double q : r.trace) worst_trace = std::max(worst_trace, r.lambda - q * (1.0 + 1e-12));
    trace.add(-worst_trace / r.lambda, where);
    if (p == 2.0) el2.add(1e-6 - r.el_residual, where);
    const auto d2 = d.rescaled(2.0);
    const auto r2 = solve_eigen(d2, table_for(d2.grid(), s, p), o.seed + k, eo);
    scal.add(1e-8 - std::abs(r2.lambda / r.lambda / std::pow(2.0, -s * p) - 1.0), where);
  }
  // Q(|u|) <= Q(u) on random sign-changing fields.
  {
    const auto g = make_grid_2d(5, 4, 0.25);
    const auto tab = table_for(g, 0.4, 1.7);
    const auto d = GridDomain::full(g);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < std::max(1, o.trials / 10); ++t) {
      std::vector<double> v(d.cell_count()), w(d.cell_count());
      for (std::size_t i = 0; i < v.size(); ++i) w[i] = std::abs(v[i] = u(rng));
      const double qu = rayleigh_quotient(ScalarField(d, v), tab);
      const double qa = rayleigh_quotient(ScalarField(d, w), tab);
      absq.add((qu - qa) / qu + 1e-12);
    }
  }
  // Frozen Nikolskii bound over random fields and every shift up to 4 diameters.
  for (int dim : {1, 2}) {
    const GridSpec g = dim == 1 ? make_grid_1d(10, 0.1) : make_grid_2d(6, 6, 1.0 / 6);
    const double c = nikolskii_constant(dim);
    for (double p : {1.0, 1.5, 2.0}) {
      for (double s : {0.1, 0.3, 0.45}) {
        if (s * p >= 1.0) continue;
        const auto tab = table_for(g, s, p);
        for (int t = 0; t < std::max(1, o.trials / 100); ++t) {
          const GridDomain d(g, random_mask(rng, g.cell_count(), 0.67));
          std::uniform_real_distribution<double> u(-1.0, 1.0);
          std::vector<double> v(d.cell_count());
          for (auto& x : v) x = t % 2 ? u(rng) : 1.0;
          const ScalarField f(d, v);
          const double sn = seminorm(f, tab);
          const int reach = static_cast<int>(std::ceil(4.0 * diameter(d) / g.spacing));
          double worst = 0.0;
          for (int dx = -reach; dx <= reach; ++dx)
            for (int dy = dim == 1 ? 0 : -reach; dy <= (dim == 1 ? 0 : reach); ++dy)
              if (dx || dy)
                worst = std::max(worst, nikolskii_ratio(f, {dx, dy}, s, p) / ((1.0 - s) * sn));
          nik.add((c - worst) / c, "dim " + std::to_string(dim) + " p=" + fmt(p));
        }
      }
    }
  }
  rep.items.push_back(poinc.item("eigen", "lambda >= 1 / Poincare constant"));
  rep.items.push_back(norm.item("eigen", "||u||_p = 1 to 1e-12"));
  rep.items.push_back(recomp.item("eigen", "lambda = [u]^p to 1e-10"));
  rep.items.push_back(trace.item("eigen", "returned lambda <= every trace value"));
  rep.items.push_back(el2.item("eigen", "EL residual <= 1e-6 at p = 2"));
  rep.items.push_back(scal.item("eigen", "lambda(2 spacing) = 2^-sp lambda"));
  rep.items.push_back(absq.item("eigen", "Q(|u|) <= Q(u)"));
  rep.items.push_back(nik.item("eigen", "difference quotients <= C (1-s) [u]^p"));
}

}  // namespace detail

/// Runs one suite by name, or all of them for "all".
inline VerifyReport run_verify(const std::string& suite, const VerifyOptions& opt = {}) {
  require(opt.trials >= 1, "trials must be >= 1");
  const auto& names = verify_suites();
  require(suite == "all" || std::find(names.begin(), names.end(), suite) != names.end(),
          "unknown verify suite: " + suite);
  VerifyReport rep;
  auto want = [&](const char* n) { return suite == "all" || suite == n; };
  if (want("pointwise")) detail::suite_pointwise(rep, opt);
  if (want("coarea")) detail::suite_coarea(rep, opt);
  if (want("interpolation")) detail::suite_interpolation(rep, opt);
  if (want("isoperimetric")) detail::suite_isoperimetric(rep, opt);
  if (want("cheeger")) detail::suite_cheeger(rep, opt);
  if (want("duality")) detail::suite_duality(rep, opt);
  if (want("eigen")) detail::suite_eigen(rep, opt);
  return rep;
}

}  // namespace fcheeger

#endif  // FCHEEGER_VERIFY_HPP
