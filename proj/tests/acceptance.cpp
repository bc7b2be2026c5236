// Acceptance run: one PASS/FAIL line per criterion, then a nonzero exit code
// if any criterion failed.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fcheeger/cheeger.hpp"
#include "fcheeger/eigenvalue.hpp"
#include "fcheeger/functional.hpp"
#include "fcheeger/verify.hpp"

using namespace fcheeger;

namespace {

using Clock = std::chrono::steady_clock;

KernelTable table(const GridSpec& g, double s, double p = 1.0) {
  KernelParams k;
  k.dim = g.dim;
  k.s = s;
  k.p = p;
  return build_table(k, g);
}

CellMask random_mask(std::mt19937_64& rng, int n, double density) {
  std::bernoulli_distribution coin(density);
  CellMask m(n);
  for (auto& x : m) x = coin(rng);
  if (!count_set(m)) m[rng() % n] = 1;
  return m;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Outcome {
  bool pass = true;
  std::string note;
};

int failures = 0;

void criterion(int id, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = Clock::now();
  Outcome o = body();
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  if (budget_s > 0.0 && secs > budget_s) {
    o.pass = false;
    o.note += "; over the time budget";
  }
  if (!o.pass) ++failures;
  std::printf("criterion %2d: %s  %s [%.2f s]\n", id, o.pass ? "PASS" : "FAIL", o.note.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double x, int prec = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, x);
  return buf;
}

// Duality figures of every Cheeger instance solved below.
double worst_dual = 0.0, worst_flowcut = 0.0;
int dual_instances = 0;

CheegerResult solve_and_record(const GridDomain& d, const KernelTable& t) {
  auto r = solve_cheeger(d, t);
  const auto& c = r.certificate;
  worst_dual = std::max(worst_dual, std::abs(r.dual_sup_norm * r.h - 1.0));
  worst_flowcut = std::max(worst_flowcut, std::abs(c.flow_value - c.cut_capacity) / c.cut_capacity);
  ++dual_instances;
  return r;
}

}  // namespace

int main() {
  std::mt19937_64 rng(20240611);

  criterion(1, 1.0, [] {
    double worst = 0.0;
    for (double s : {0.25, 0.5, 0.75})
      for (double len : {0.5, 1.0, 2.0}) {
        const auto g = make_grid_1d(16, len / 16);
        const double ref = 4.0 * std::pow(len, 1.0 - s) / (s * (1.0 - s));
        worst = std::max(worst, rel(s_perimeter(g, CellMask(16, 1), table(g, s)), ref));
      }
    return Outcome{worst <= 1e-4, "worst relative error " + num(worst)};
  });

  criterion(2, 60.0, [&] {
    double wp = 0.0, wh = 0.0, wl = 0.0;
    std::vector<GridDomain> doms{GridDomain(make_grid_1d(10, 0.1), CellMask{1, 1, 0, 1, 1, 1, 0, 0, 1, 1})};
    {
      const auto g = make_grid_2d(6, 6, 1.0 / 6);
      doms.emplace_back(g, random_mask(rng, g.cell_count(), 0.7));
    }
    for (const auto& d : doms) {
      const int n = d.grid().dim;
      const auto d2 = d.rescaled(2.0);
      for (double s : {0.3, 0.7}) {
        const auto t = table(d.grid(), s), t2 = table(d2.grid(), s);
        wp = std::max(wp, rel(s_perimeter(d2.grid(), d2.mask(), t2) / s_perimeter(d.grid(), d.mask(), t),
                              std::pow(2.0, n - s)));
        wh = std::max(wh, rel(solve_and_record(d2, t2).h / solve_and_record(d, t).h, std::pow(2.0, -s)));
      }
      for (auto [s, p] : {std::pair{0.3, 1.5}, {0.45, 2.0}}) {
        const double a = solve_eigen(d, table(d.grid(), s, p)).lambda;
        const double b = solve_eigen(d2, table(d2.grid(), s, p)).lambda;
        wl = std::max(wl, rel(b / a, std::pow(2.0, -s * p)));
      }
    }
    return Outcome{wp <= 1e-10 && wh <= 1e-10 && wl <= 1e-10,
                   "P_s " + num(wp) + ", h_s " + num(wh) + ", lambda " + num(wl)};
  });

  criterion(3, 300.0, [&] {
    std::vector<GridDomain> doms;
    for (int n = 1; n <= 16; ++n) doms.push_back(GridDomain::full(make_grid_1d(n, 1.0 / n)));
    for (int a = 1; a <= 16; ++a)
      for (int b = a; a * b <= 16; ++b) doms.push_back(GridDomain::full(make_grid_2d(a, b, 0.25)));
    for (int k = 0; k < 10; ++k) {
      const auto g = make_grid_2d(4, 4, 0.25);
      doms.emplace_back(g, random_mask(rng, 16, 0.65));
    }
    int mismatched = 0, cases = 0;
    double worst = 0.0;
    for (const auto& d : doms)
      for (double s : {0.3, 0.5, 0.8}) {
        const auto t = table(d.grid(), s);
        const auto model = nonlocal_model(t, d);
        const auto brute = detail::brute_force_cheeger(model);
        const auto r = solve_and_record(d, t);
        worst = std::max(worst, rel(r.h, brute.h));
        if (r.optimal_set != model.grid_mask_of(brute.in)) ++mismatched;
        ++cases;
      }
    return Outcome{worst <= 1e-10 && mismatched == 0,
                   std::to_string(cases) + " instances, worst h error " + num(worst) + ", set mismatches " +
                       std::to_string(mismatched)};
  });

  criterion(4, 0.0, [&] {
    // add larger instances to the ones already solved
    const auto g = make_grid_2d(12, 12, 1.0 / 12, {-0.5, -0.5});
    solve_and_record(GridDomain::full(g), table(g, 0.5));
    const auto g2 = make_grid_2d(20, 20, 0.1, {-1.0, -1.0});
    solve_and_record(rasterize(ball_shape({0.0, 0.0}, 1.0), g2), table(g2, 0.4));
    solve_and_record(rasterize(annulus_shape({0.0, 0.0}, 0.4, 1.0), g2), table(g2, 0.6));
    return Outcome{worst_dual <= 1e-8 && worst_flowcut <= 1e-9,
                   std::to_string(dual_instances) + " instances, |sup phi h - 1| " + num(worst_dual) +
                       ", |flow - cut| / cut " + num(worst_flowcut)};
  });

  criterion(5, 0.0, [&] {
    const std::vector<GridSpec> grids{make_grid_1d(12, 1.0 / 12), make_grid_2d(6, 6, 1.0 / 6)};
    const std::vector<double> ss{0.3, 0.5, 0.8};
    std::vector<KernelTable> tabs;
    for (const auto& g : grids)
      for (double s : ss) tabs.push_back(table(g, s));
    std::uniform_real_distribution<double> lev(0.0, 3.0);
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t gi = t % 2, si = (t / 2) % 3;
      const GridDomain d(grids[gi], random_mask(rng, grids[gi].cell_count(), 0.75));
      std::vector<double> levels(2 + rng() % 4);
      for (auto& x : levels) x = lev(rng);
      levels[0] = 0.0;
      std::vector<double> v(d.cell_count());
      for (auto& x : v) x = levels[rng() % levels.size()];
      v[rng() % v.size()] = levels[1];  // never identically zero
      const auto r = coarea_check(ScalarField(d, v), tabs[gi * 3 + si]);
      worst = std::max(worst, std::abs(r.gap) / r.lhs);
    }
    return Outcome{worst <= 1e-10, "1000 fields, worst relative gap " + num(worst)};
  });

  criterion(6, 10.0, [&] {
    VerifyOptions o;
    o.trials = 100000;
    VerifyReport rep;
    detail::suite_pointwise(rep, o);
    std::string note = "1e5 samples each;";
    for (const auto& it : rep.items) note += " " + it.name + (it.passed ? " ok" : " VIOLATED");
    return Outcome{rep.passed(), note};
  });

  criterion(7, 0.0, [&] {
    double sharp = 0.0, top = 0.0;
    for (double s : {0.25, 0.5, 0.75}) {
      for (int n : {1, 4, 16}) {
        const auto g = make_grid_1d(n, 1.0 / n);
        sharp = std::max(sharp, std::abs(interpolation_bound(g, CellMask(n, 1), table(g, s)).ratio - 1.0));
      }
      for (const auto& g : {make_grid_1d(16, 1.0 / 16), make_grid_2d(8, 8, 0.125)}) {
        const auto t = table(g, s);
        for (int k = 0; k < 200; ++k) {
          const auto m = random_mask(rng, g.cell_count(), 0.1 + 0.8 * (k % 9) / 8.0);
          top = std::max(top, interpolation_bound(g, m, t).ratio);
        }
      }
    }
    return Outcome{sharp <= 1e-3 && top <= 1.0 + 1e-6,
                   "single interval |ratio - 1| " + num(sharp) + "; largest ratio over 1200 random sets " +
                       num(top, 12)};
  });

  criterion(8, 600.0, [&] {
    const auto g = make_grid_2d(32, 32, 1.0 / 32);
    const std::vector<double> ss{0.3, 0.5, 0.8};
    std::vector<KernelTable> tabs;
    for (double s : ss) tabs.push_back(table(g, s));
    double worst = 1e300;
    for (int t = 0; t < 1000; ++t) {
      const std::size_t k = t % ss.size();
      const auto m = random_mask(rng, g.cell_count(), 0.02 + 0.96 * (t % 25) / 24.0);
      const double ps = s_perimeter(g, m, tabs[k]);
      const double d = isoperimetric_deficit(g, m, tabs[k]);
      worst = std::min(worst, (d + 2.0 * g.spacing * 1e-6 * ps) / ps);
    }
    // Faber-Krahn, square against the rasterized disk
    const auto gb = make_grid_2d(16, 16, 1.0 / 8, {-1.0, -1.0});
    const auto sqd = GridDomain::full(gb);
    const auto disk = rasterize(ball_shape({0.0, 0.0}, 1.0), gb);
    const double sh = 0.4;
    const auto fh = faber_krahn_cheeger(solve_and_record(sqd, table(gb, sh)),
                                        solve_and_record(disk, table(gb, sh)), 2, sh);
    const double sl = 0.2;
    const auto tl = table(gb, sl, 2.0);
    const auto fl = faber_krahn_eigen(solve_eigen(sqd, tl), solve_eigen(disk, tl));
    return Outcome{worst >= 0.0 && fh.lhs > fh.rhs && fl.lhs > fl.rhs,
                   "1000 sets, worst scaled deficit margin " + num(worst) + "; h_s square " + num(fh.lhs, 6) +
                       " > disk " + num(fh.rhs, 6) + " (s=0.4); lambda square " + num(fl.lhs, 6) + " > disk " +
                       num(fl.rhs, 6) + " (s=0.2, p=2)"};
  });

  criterion(9, 600.0, [&] {
    const double s = 0.45;
    const std::vector<double> ps{2.0, 1.5, 1.25, 1.1, 1.05};
    bool ok = true;
    std::string note;
    for (const auto& d : {GridDomain::full(make_grid_1d(8, 1.0 / 8)),
                          GridDomain::full(make_grid_2d(16, 16, 1.0 / 16))}) {
      const auto sw = p_to_1_sweep(d, s, ps);
      note += std::to_string(d.grid().dim) + "D gaps:";
      for (const auto& pt : sw) note += " " + num(pt.gap) + (pt.converged ? "" : "*");
      note += "; ";
      ok = ok && sw.back().gap < 0.05;
    }
    return Outcome{ok, note + "(* = iteration cap reached)"};
  });

  criterion(10, 0.0, [&] {
    const std::vector<double> ss{0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95};
    const auto g = make_grid_1d(32, 1.0 / 32);
    const auto sw = s_to_1_sweep(GridDomain::full(g), ss);
    bool mono = true;
    for (std::size_t k = 1; k < sw.size(); ++k)
      mono = mono && std::abs(sw[k].value - sw[k].target) < std::abs(sw[k - 1].value - sw[k - 1].target);
    const double gap = rel(sw.back().value, sw.back().target);
    // 2D trend only
    const auto g2 = make_grid_2d(12, 12, 1.0 / 12);
    const auto sw2 = s_to_1_sweep(GridDomain::full(g2), {0.5, 0.7, 0.9, 0.95});
    std::string trend = "2D (1-s)h_s / (2 omega_1 h_1):";
    for (const auto& pt : sw2) trend += " " + num(pt.value / pt.target);
    return Outcome{mono && gap < 0.1,
                   "1D monotone " + std::string(mono ? "yes" : "no") + ", final gap " + num(gap) + "; " + trend};
  });

  criterion(11, 0.0, [&] {
    const auto g = make_grid_2d(64, 64, 1.0 / 64);
    const auto dom = GridDomain::full(g);
    const auto t = table(g, 0.5);
    const auto r = solve_and_record(dom, t);
    const auto pts = spread_points(free_boundary_points(dom, r.optimal_set), 5);
    double worst = 0.0, worst_half = 0.0;
    std::string ratios;
    for (const auto& x : pts) {
      const double q = nonlocal_mean_curvature(g, r.optimal_set, x, t) / -r.h;
      ratios += " " + num(q);
      worst = std::max(worst, std::abs(q - 1.0));
      worst_half = std::max(worst_half, std::abs(q - 0.5));
    }
    return Outcome{pts.size() == 5 && worst <= 0.2,
                   "H / (-h_s) at 5 points:" + ratios + "; worst deviation from 1 " + num(worst) +
                       ", from 1/2 " + num(worst_half)};
  });

  criterion(12, 0.0, [&] {
    auto t0 = Clock::now();
    const auto rep = run_verify("all");
    const double tv = std::chrono::duration<double>(Clock::now() - t0).count();
    t0 = Clock::now();
    const auto g = make_grid_2d(64, 64, 1.0 / 64);
    const auto r = solve_cheeger(GridDomain::full(g), table(g, 0.5));
    const double tc = std::chrono::duration<double>(Clock::now() - t0).count();
    return Outcome{rep.passed() && tv < 1800.0 && tc < 60.0,
                   "verify all " + std::string(rep.passed() ? "passed" : "FAILED") + " in " + num(tv) +
                       " s; 64x64 table + Cheeger solve " + num(tc) + " s (h = " + num(r.h, 8) + ")"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
