#ifndef FCHEEGER_CHEEGER_HPP
#define FCHEEGER_CHEEGER_HPP

// Discrete Cheeger problems  h = min_{E in Omega} P(E) / |E|  for pairwise
// cut functionals
//
//   P(E) = sum_{a in E} e_a + sum_{a in E, b in Omega \ E} w_ab,
//
// solved by Dinkelbach iteration. Each step minimizes P(E) - lambda |E| with
// one min cut on the graph
//
//   s -> a : e_a        a -> t : lambda v        a <-> b : w_ab
//
// whose cut with sink side E costs P(E) + lambda (|Omega| - |E|). The
// nonlocal perimeter has e_a = 2 L(C_a, Omega^c) and w_ab = 2 W_ab; the
// classical one has face counts.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include "fcheeger/common.hpp"
#include "fcheeger/geometry.hpp"
#include "fcheeger/kernel.hpp"
#include "fcheeger/maxflow.hpp"

namespace fcheeger {

/// A pairwise cut functional on the cells of a domain. Values are kept in
/// "unit" form: the physical perimeter is scale * (unit perimeter) and every
/// cell has volume cell_volume.
struct CutModel {
  GridDomain domain;
  std::vector<double> exterior;        // e_a, per domain cell position
  std::vector<std::array<int, 2>> pairs;  // a < b, positions in domain.cells()
  std::vector<double> weights;         // w_ab
  double scale = 1.0;
  double cell_volume = 1.0;

  int size() const { return static_cast<int>(exterior.size()); }

  /// Unit perimeter of a set given per cell position.
  double unit_perimeter(std::span<const std::uint8_t> in) const {
    std::vector<double> t;
    for (int a = 0; a < size(); ++a)
      if (in[a]) t.push_back(exterior[a]);
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (in[pairs[k][0]] != in[pairs[k][1]]) t.push_back(weights[k]);
    return pairwise_sum(t);
  }

  double perimeter(std::span<const std::uint8_t> in) const { return scale * unit_perimeter(in); }

  /// Per-position membership from a grid-wide mask.
  std::vector<std::uint8_t> positions_of(std::span<const std::uint8_t> grid_mask) const {
    std::vector<std::uint8_t> in(size());
    for (int a = 0; a < size(); ++a) in[a] = grid_mask[domain.cells()[a]] ? 1 : 0;
    return in;
  }
  CellMask grid_mask_of(std::span<const std::uint8_t> in) const {
    CellMask m(domain.grid().cell_count(), 0);
    for (int a = 0; a < size(); ++a)
      if (in[a]) m[domain.cells()[a]] = 1;
    return m;
  }
};

inline CutModel nonlocal_model(const KernelTable& table, const GridDomain& domain) {
  require(table.params().p == 1.0, "the s-perimeter needs a p = 1 table");
  const Coupling cp(table, domain);
  CutModel m{domain, {}, {}, {}, cp.scale(), cp.cell_volume()};
  const int n = cp.size();
  m.exterior.resize(n);
  for (int a = 0; a < n; ++a) m.exterior[a] = 2.0 * cp.unit_exterior(a);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) {
      const double w = cp.unit_weight(a, b);
      if (w > 0.0) {
        m.pairs.push_back({a, b});
        m.weights.push_back(2.0 * w);
      }
    }
  return m;
}

/// Face-neighbour model: P(E) is the classical perimeter of the union of cells.
inline CutModel classical_model(const GridDomain& domain) {
  const auto& g = domain.grid();
  CutModel m{domain, {}, {}, {}, std::pow(g.spacing, g.dim - 1), g.cell_volume()};
  std::vector<int> pos(g.cell_count(), -1);
  for (std::size_t a = 0; a < domain.cells().size(); ++a) pos[domain.cells()[a]] = static_cast<int>(a);
  m.exterior.assign(domain.cells().size(), 0.0);
  for (std::size_t a = 0; a < domain.cells().size(); ++a) {
    const auto c = g.coords(domain.cells()[a]);
    const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (int k = 0; k < (g.dim == 2 ? 4 : 2); ++k) {
      const int jx = c[0] + nb[k][0], jy = c[1] + nb[k][1];
      const int j = g.in_grid(jx, jy) ? pos[g.index(jx, jy)] : -1;
      if (j < 0) {
        m.exterior[a] += 1.0;
      } else if (j > static_cast<int>(a)) {
        m.pairs.push_back({static_cast<int>(a), j});
        m.weights.push_back(1.0);
      }
    }
  }
  return m;
}

struct DinkelbachStep {
  double lambda = 0.0;            // physical
  double subproblem_value = 0.0;  // min P(E) - lambda |E|, physical
};

struct DualCertificate {
  double phi_sup_norm = 0.0;
  /// max over cells |div phi / v - 1|
  double residual = 0.0;
  double flow_value = 0.0;      // unit
  double cut_capacity = 0.0;    // unit
  double conservation_error = 0.0;
  /// phi on the exterior channel of each cell, and phi_ab for each model pair
  /// (flow from b into a, normalized by h times the pair capacity).
  std::vector<double> phi_exterior;
  std::vector<double> phi_pairs;
};

struct CheegerResult {
  double h = 0.0;
  CellMask optimal_set;  // grid-wide
  std::vector<DinkelbachStep> iterations;
  double dual_sup_norm = 0.0;
  bool calibrable = false;
  double domain_measure = 0.0;
  double set_measure = 0.0;
  double set_perimeter = 0.0;
  DualCertificate certificate;
};

namespace detail {

/// Graph of a cut model with handles: source arcs [0, n), sink arcs
/// [n, 2n), pair edges from 2n in model order.
struct CheegerGraph {
  FlowNetwork net;
  int n;

  explicit CheegerGraph(const CutModel& m)
      : net(m.size() + 2, m.size(), m.size() + 1), n(m.size()) {
    net.reserve(2 * static_cast<std::size_t>(n) + m.pairs.size());
    for (int a = 0; a < n; ++a) net.add_arc(n, a, m.exterior[a]);
    for (int a = 0; a < n; ++a) net.add_arc(a, n + 1, 0.0);
    for (std::size_t k = 0; k < m.pairs.size(); ++k)
      net.add_edge(m.pairs[k][0], m.pairs[k][1], m.weights[k]);
    net.finalize();
  }

  CutResult solve(double unit_lambda, double tol) {
    for (int a = 0; a < n; ++a) net.set_capacity(n + a, unit_lambda);
    return solve_maxflow(net, tol);
  }
};

inline double max_capacity(const CutModel& m, double lambda) {
  double c = lambda;
  for (double e : m.exterior) c = std::max(c, e);
  for (double w : m.weights) c = std::max(c, w);
  return c;
}

inline DualCertificate make_certificate(const CutModel& m, CheegerGraph& g,
                                        const CutResult& cut, double unit_h) {
  DualCertificate c;
  const double h = unit_h * m.scale / m.cell_volume;
  c.flow_value = cut.flow_value;
  c.cut_capacity = cut.cut_capacity;
  c.conservation_error = cut.conservation_error;
  const int n = m.size();
  c.phi_exterior.resize(n);
  c.phi_pairs.resize(m.pairs.size());
  std::vector<std::vector<double>> inflow(n);
  double sup = 0.0;
  for (int a = 0; a < n; ++a) {
    const double f = cut.arc_flows[g.net.arc_of(a)];
    c.phi_exterior[a] = m.exterior[a] > 0.0 ? f / (h * m.exterior[a]) : 0.0;
    sup = std::max(sup, std::abs(c.phi_exterior[a]));
    inflow[a].push_back(f);
  }
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [a, b] = m.pairs[k];
    const double f_ab = cut.arc_flows[g.net.arc_of(2 * n + static_cast<int>(k))];
    c.phi_pairs[k] = -f_ab / (h * m.weights[k]);  // flow from b into a
    sup = std::max(sup, std::abs(c.phi_pairs[k]));
    inflow[a].push_back(-f_ab);
    inflow[b].push_back(f_ab);
  }
  c.phi_sup_norm = sup;
  for (int a = 0; a < n; ++a) {
    const double div = pairwise_sum(inflow[a]) * m.scale / m.cell_volume;
    c.residual = std::max(c.residual, std::abs(div / h - 1.0));
  }
  return c;
}

}  // namespace detail

/// Dinkelbach on a cut model; ties go to the maximal minimizer.
inline CheegerResult solve_cut_ratio(const CutModel& m, int max_iterations = 100) {
  const int n = m.size();
  require(n > 0, "empty domain");
  detail::CheegerGraph graph(m);
  std::vector<std::uint8_t> current(n, 1);
  double lambda = m.unit_perimeter(current) / n;
  const double tol_scale = 1e-12;
  CheegerResult r;
  bool converged = false;
  CutResult last;
  double last_lambda = lambda;
  for (int it = 0; it < max_iterations; ++it) {
    CutResult cut = graph.solve(lambda, tol_scale * detail::max_capacity(m, lambda));
    std::vector<std::uint8_t> e(n);
    int count = 0;
    for (int a = 0; a < n; ++a) count += (e[a] = cut.source_side[a] ? 0 : 1);
    const double sub = cut.flow_value - lambda * n;
    r.iterations.push_back({lambda * m.scale / m.cell_volume, sub * m.scale});
    if (count == 0) {
      // Rounding put lambda at or below the optimum: keep the previous set.
      last = std::move(cut);
      last_lambda = lambda;
      converged = true;
      break;
    }
    const double ratio = m.unit_perimeter(e) / count;
    current = std::move(e);
    last = std::move(cut);
    last_lambda = lambda;
    if (lambda - ratio <= 1e-10 * lambda) {
      converged = true;
      break;
    }
    lambda = ratio;
  }
  if (!converged) throw ConvergenceError("Dinkelbach did not converge");

  const int count = static_cast<int>(std::count(current.begin(), current.end(), 1));
  const double unit_h = m.unit_perimeter(current) / count;
  if (unit_h != last_lambda) {
    last = graph.solve(unit_h, tol_scale * detail::max_capacity(m, unit_h));
  }
  r.h = unit_h * m.scale / m.cell_volume;
  r.optimal_set = m.grid_mask_of(current);
  r.calibrable = count == n;
  r.domain_measure = n * m.cell_volume;
  r.set_measure = count * m.cell_volume;
  r.set_perimeter = m.perimeter(current);
  r.certificate = detail::make_certificate(m, graph, last, unit_h);
  r.dual_sup_norm = r.certificate.phi_sup_norm;
  return r;
}

/// h_s(Omega) for the p = 1 kernel table.
inline CheegerResult solve_cheeger(const GridDomain& domain, const KernelTable& table) {
  return solve_cut_ratio(nonlocal_model(table, domain));
}

/// Classical h_1 with the face-count perimeter.
inline CheegerResult solve_classical_cheeger(const GridDomain& domain) {
  return solve_cut_ratio(classical_model(domain));
}

inline const DualCertificate& dual_certificate(const CheegerResult& r) { return r.certificate; }

/// Flux of phi out through the boundary of A (per cell positions), which
/// equals |A| exactly; returns (flux, sup|phi| P(A)).
inline std::pair<double, double> certify_subset(const CutModel& m, const CheegerResult& r,
                                                std::span<const std::uint8_t> in) {
  const auto& c = r.certificate;
  std::vector<double> t;
  for (int a = 0; a < m.size(); ++a)
    if (in[a]) t.push_back(m.exterior[a] * c.phi_exterior[a]);
  for (std::size_t k = 0; k < m.pairs.size(); ++k) {
    const auto [a, b] = m.pairs[k];
    if (in[a] && !in[b]) t.push_back(m.weights[k] * c.phi_pairs[k]);
    if (in[b] && !in[a]) t.push_back(-m.weights[k] * c.phi_pairs[k]);
  }
  const double flux = pairwise_sum(t) * m.scale;
  return {flux, c.phi_sup_norm * m.perimeter(in)};
}

// ---------------------------------------------------------------------------

struct PairReport {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// |Omega|^(s/N) h_s(Omega) >= |B|^(s/N) h_s(B).
inline PairReport faber_krahn_cheeger(const CheegerResult& omega, const CheegerResult& ball,
                                      int dim, double s) {
  return {std::pow(omega.domain_measure, s / dim) * omega.h,
          std::pow(ball.domain_measure, s / dim) * ball.h};
}

inline bool calibrability_check(const GridDomain& domain, const KernelTable& table) {
  return solve_cheeger(domain, table).calibrable;
}

struct HsH1Report {
  double hs = 0.0;
  double h1 = 0.0;
  double bound = 0.0;  // 2^(1-s) N omega_N / ((1-s) s) * h1^s
};

inline HsH1Report hs_vs_h1(const GridDomain& domain, const KernelTable& table) {
  const double s = table.params().s;
  const int n = domain.grid().dim;
  HsH1Report r;
  r.hs = solve_cheeger(domain, table).h;
  r.h1 = solve_classical_cheeger(domain).h;
  r.bound = std::pow(2.0, 1.0 - s) * n * unit_ball_volume(n) / ((1.0 - s) * s) * std::pow(r.h1, s);
  return r;
}

struct SweepPoint {
  double s = 0.0;
  double value = 0.0;   // (1 - s) h_s
  double target = 0.0;  // 2 omega_{N-1} h_1
};

/// (1 - s) h_s along s_list, with the s -> 1 limit 2 omega_{N-1} h_1.
inline std::vector<SweepPoint> s_to_1_sweep(const GridDomain& domain,
                                            const std::vector<double>& s_list,
                                            const KernelParams& base = {}) {
  const int n = domain.grid().dim;
  const double target = 2.0 * unit_ball_volume(n - 1) * solve_classical_cheeger(domain).h;
  std::vector<SweepPoint> out;
  for (double s : s_list) {
    KernelParams kp = base;
    kp.dim = n;
    kp.s = s;
    kp.p = 1.0;
    const KernelTable table = build_table(kp, domain.grid());
    out.push_back({s, (1.0 - s) * solve_cheeger(domain, table).h, target});
  }
  return out;
}

}  // namespace fcheeger

#endif  // FCHEEGER_CHEEGER_HPP
