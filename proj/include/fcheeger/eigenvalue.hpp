#ifndef FCHEEGER_EIGENVALUE_HPP
#define FCHEEGER_EIGENVALUE_HPP

// First eigenvalue of the fractional p-Laplacian as the minimum of the
// Rayleigh quotient  Q(u) = [u]_{s,p}^p / ||u||_p^p  over fields vanishing
// outside the domain.
//
// Q is minimized directly with limited-memory BFGS directions, Armijo
// backtracking, the projection u -> |u| (which never increases Q) and
// renormalization. Several starts are run and the best is kept.

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fcheeger/cheeger.hpp"
#include "fcheeger/common.hpp"
#include "fcheeger/functional.hpp"
#include "fcheeger/geometry.hpp"
#include "fcheeger/kernel.hpp"

namespace fcheeger {

struct EigenOptions {
  int random_starts = 5;
  bool constant_start = true;
  /// Iteration budget of each start; the best start is then continued up to
  /// max_iterations.
  int screen_iterations = 300;
  int max_iterations = 5000;
  /// Stop when the relative Euler-Lagrange mismatch drops to this.
  double gradient_tol = 1e-10;
  /// Or when Q improved by less than this (relative) over stall_window steps.
  double stall_tol = 1e-14;
  int stall_window = 200;
  int lbfgs_memory = 10;
  /// Optional warm start (one value per domain cell); used as an extra start.
  std::vector<double> initial;
};

struct EigenResult {
  double s = 0.0;
  double p = 0.0;
  double lambda = 0.0;
  ScalarField field;
  double el_residual = 0.0;
  std::vector<double> trace;  // lambda after each accepted step of the best run
  bool converged = false;
  std::string stop_reason;
  int iterations = 0;
  /// Final lambda of every start, in run order.
  std::vector<double> restart_values;
  /// (max - min) / min over restart_values.
  double restart_spread = 0.0;
};

namespace detail {

/// Dense unit weights and exterior terms of a coupling, for repeated
/// evaluation of the quotient and its gradient.
class RayleighProblem {
 public:
  RayleighProblem(const Coupling& cp, double p) : n_(cp.size()), p_(p) {
    w_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
    for (int a = 0; a < n_; ++a)
      for (int b = 0; b < n_; ++b)
        if (a != b) w_[static_cast<std::size_t>(a) * n_ + b] = cp.unit_weight(a, b);
    ext_ = cp.unit_exterior();
  }

  int size() const { return n_; }
  double p() const { return p_; }
  double weight(int a, int b) const { return w_[static_cast<std::size_t>(a) * n_ + b]; }
  double exterior(int a) const { return ext_[a]; }

  /// |t|^(p-2) t
  double g(double t) const { return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), p_ - 1.0), t); }

  /// Q(u) in unit form; fills grad when non-null.
  double value(const std::vector<double>& u, std::vector<double>* grad) const {
    std::vector<double> rows(n_), row(n_ + 1), den(n_);
    std::vector<double> ga(n_, 0.0);
    for (int a = 0; a < n_; ++a) {
      const double* wa = &w_[static_cast<std::size_t>(a) * n_];
      int m = 0;
      double acc = 0.0;
      for (int b = a + 1; b < n_; ++b) {
        const double d = u[a] - u[b];
        if (d == 0.0) continue;
        const double ad = std::abs(d);
        const double q = wa[b] * std::pow(ad, p_ - 1.0);
        row[m++] = q * ad;
        const double f = std::copysign(q, d);
        acc += f;
        ga[b] -= f;
      }
      ga[a] += acc;
      const double qa = u[a] == 0.0 ? 0.0 : std::pow(std::abs(u[a]), p_ - 1.0);
      row[m++] = ext_[a] * qa * std::abs(u[a]);
      rows[a] = 2.0 * pairwise_sum(std::span<const double>(row.data(), m));
      den[a] = qa * std::abs(u[a]);
    }
    const double num = pairwise_sum(rows);
    const double dsum = pairwise_sum(den);
    const double q = num / dsum;
    if (grad) {
      grad->resize(n_);
      for (int a = 0; a < n_; ++a) {
        const double ua = u[a] == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(u[a]), p_ - 1.0), u[a]);
        const double dn = 2.0 * p_ * (ga[a] + ext_[a] * ua);
        (*grad)[a] = (dn - q * p_ * ua) / dsum;
      }
    }
    return q;
  }

  /// Scale so that sum |u|^p = 1.
  void normalize(std::vector<double>& u) const {
    std::vector<double> t(n_);
    for (int a = 0; a < n_; ++a) t[a] = std::pow(std::abs(u[a]), p_);
    const double f = std::pow(pairwise_sum(t), -1.0 / p_);
    for (auto& x : u) x *= f;
  }

 private:
  int n_;
  double p_;
  std::vector<double> w_;
  std::vector<double> ext_;
};

struct RunOutcome {
  std::vector<double> u;
  double q = 0.0;
  std::vector<double> trace;
  bool converged = false;
  std::string reason;
  int iterations = 0;
};

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> t(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) t[k] = a[k] * b[k];
  return pairwise_sum(t);
}

/// max_a |dQ/du_a| / (Q max_a |dD/du_a|) with D = sum |u|^p = 1: the
/// relative Euler-Lagrange mismatch.
inline double relative_stationarity(const RayleighProblem& pb, const std::vector<double>& u,
                                    const std::vector<double>& grad, double q) {
  double gmax = 0.0, dmax = 0.0;
  for (int a = 0; a < pb.size(); ++a) {
    gmax = std::max(gmax, std::abs(grad[a]));
    dmax = std::max(dmax, std::abs(pb.g(u[a])));
  }
  return gmax / (q * pb.p() * dmax);
}

inline RunOutcome descend(const RayleighProblem& pb, std::vector<double> u,
                          const EigenOptions& opt, double to_physical) {
  const int n = pb.size();
  for (auto& x : u) x = std::abs(x);
  pb.normalize(u);
  RunOutcome out;
  std::vector<double> grad;
  double q = pb.value(u, &grad);
  out.trace.push_back(q * to_physical);
  std::vector<double> best_u = u;
  double best_q = q;
  double stat = relative_stationarity(pb, u, grad, q);
  double best_stat = stat;
  std::vector<double> stat_hist{stat};
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::vector<double> d(n), un(n), gn;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it;
    if (stat <= opt.gradient_tol) {
      out.converged = true;
      out.reason = "gradient";
      break;
    }
    const int w = opt.stall_window;
    if (static_cast<int>(out.trace.size()) > w) {
      const double old = out.trace[out.trace.size() - 1 - w];
      const double old_stat =
          *std::min_element(stat_hist.begin(), stat_hist.end() - w);
      if (old - best_q * to_physical <= opt.stall_tol * old && best_stat > 0.5 * old_stat) {
        out.converged = true;
        out.reason = "stalled";
        break;
      }
    }
    // Two-loop recursion.
    d = grad;
    std::vector<double> alpha(S.size());
    for (int k = static_cast<int>(S.size()) - 1; k >= 0; --k) {
      alpha[k] = rho[k] * dot(S[k], d);
      for (int a = 0; a < n; ++a) d[a] -= alpha[k] * Y[k][a];
    }
    double gamma = 1e-2 / std::sqrt(dot(grad, grad));
    if (!S.empty()) gamma = dot(S.back(), Y.back()) / dot(Y.back(), Y.back());
    for (auto& x : d) x *= gamma;
    for (std::size_t k = 0; k < S.size(); ++k) {
      const double beta = rho[k] * dot(Y[k], d);
      for (int a = 0; a < n; ++a) d[a] += S[k][a] * (alpha[k] - beta);
    }
    for (auto& x : d) x = -x;
    double slope = dot(grad, d);
    if (!(slope < 0.0)) {
      S.clear();
      Y.clear();
      rho.clear();
      const double gn2 = std::sqrt(dot(grad, grad));
      for (int a = 0; a < n; ++a) d[a] = -grad[a] / gn2 * 1e-2;
      slope = dot(grad, d);
    }
    // Armijo backtracking. Once Q differences drop to rounding level the
    // step is judged by the directional derivative instead.
    double t = 1.0;
    double qn = q;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int a = 0; a < n; ++a) un[a] = std::abs(u[a] + t * d[a]);
      pb.normalize(un);
      qn = pb.value(un, &gn);
      if (qn <= q + 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      if (qn <= q * (1.0 + 1e-13) && std::abs(dot(gn, d)) <= 0.9 * std::abs(slope)) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (!S.empty()) {
        S.clear();
        Y.clear();
        rho.clear();
        continue;
      }
      out.converged = true;
      out.reason = "line search exhausted";
      break;
    }
    std::vector<double> sv(n), yv(n);
    for (int a = 0; a < n; ++a) {
      sv[a] = un[a] - u[a];
      yv[a] = gn[a] - grad[a];
    }
    const double sy = dot(sv, yv);
    if (sy > 1e-300) {
      S.push_back(std::move(sv));
      Y.push_back(std::move(yv));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > opt.lbfgs_memory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    u = un;
    grad = gn;
    q = qn;
    stat = relative_stationarity(pb, u, grad, q);
    stat_hist.push_back(stat);
    // Within rounding of Q, prefer the more stationary field.
    if (q < best_q * (1.0 - 1e-13) || (q <= best_q * (1.0 + 1e-13) && stat < best_stat)) {
      best_q = std::min(best_q, q);
      best_u = u;
      best_stat = stat;
    }
    out.trace.push_back(q * to_physical);
  }
  if (out.reason.empty()) out.reason = "max iterations";
  out.u = std::move(best_u);
  out.q = best_q;
  return out;
}

}  // namespace detail

/// max_k |LHS_k / v - lambda g(u_k)| / max_k |g(u_k)|, where LHS_k is the
/// first variation of the seminorm against the indicator of cell k,
/// LHS_k = 2 sum_j W_kj g(u_k - u_j) + 2 L(C_k, Omega^c) g(u_k).
inline double el_residual(const ScalarField& field, const KernelTable& table, double lambda) {
  const Coupling cp(table, field.domain);
  const double p = table.params().p;
  const int n = cp.size();
  auto g = [p](double t) { return t == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(t), p - 1.0), t); };
  const auto& u = field.values;
  double worst = 0.0, gmax = 0.0;
  std::vector<double> terms(n + 1);
  for (int k = 0; k < n; ++k) {
    int m = 0;
    for (int j = 0; j < n; ++j)
      if (j != k) terms[m++] = cp.unit_weight(k, j) * g(u[k] - u[j]);
    terms[m++] = cp.unit_exterior(k) * g(u[k]);
    const double lhs = 2.0 * cp.scale() * pairwise_sum(std::span<const double>(terms.data(), m));
    worst = std::max(worst, std::abs(lhs / cp.cell_volume() - lambda * g(u[k])));
    gmax = std::max(gmax, std::abs(g(u[k])));
  }
  return worst / gmax;
}

/// Rayleigh quotient [u]^p / ||u||_p^p.
inline double rayleigh_quotient(const ScalarField& field, const KernelTable& table) {
  return seminorm(field, table) / field.lp_norm_p(table.params().p);
}

inline EigenResult solve_eigen(const GridDomain& domain, const KernelTable& table,
                               std::uint64_t seed = 1, const EigenOptions& opt = {}) {
  const double p = table.params().p;
  require(p > 1.0, "solve_eigen needs p > 1 (use solve_cheeger for p = 1)");
  const Coupling cp(table, domain);
  const detail::RayleighProblem pb(cp, p);
  const int n = pb.size();
  const double to_physical = cp.scale() / cp.cell_volume();

  std::vector<std::vector<double>> starts;
  if (!opt.initial.empty()) {
    require(opt.initial.size() == static_cast<std::size_t>(n), "initial field size mismatch");
    starts.push_back(opt.initial);
  }
  if (opt.constant_start) starts.emplace_back(n, 1.0);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  for (int r = 0; r < opt.random_starts; ++r) {
    std::vector<double> u(n);
    for (auto& x : u) x = unif(rng);
    starts.push_back(std::move(u));
  }
  require(!starts.empty(), "no starting field");

  EigenResult res{table.params().s, p, 0.0, ScalarField::constant(domain, 0.0)};
  EigenOptions screen = opt;
  screen.max_iterations = std::min(opt.screen_iterations, opt.max_iterations);
  int best = -1;
  detail::RunOutcome best_run;
  for (std::size_t k = 0; k < starts.size(); ++k) {
    auto run = detail::descend(pb, starts[k], screen, to_physical);
    res.restart_values.push_back(run.q * to_physical);
    if (best < 0 || run.q < best_run.q) {
      best = static_cast<int>(k);
      best_run = std::move(run);
    }
  }
  const auto [lo, hi] = std::minmax_element(res.restart_values.begin(), res.restart_values.end());
  res.restart_spread = (*hi - *lo) / *lo;
  if (!best_run.converged) {
    EigenOptions rest = opt;
    rest.max_iterations = opt.max_iterations - screen.max_iterations;
    auto more = detail::descend(pb, best_run.u, rest, to_physical);
    best_run.trace.insert(best_run.trace.end(), more.trace.begin() + 1, more.trace.end());
    best_run.iterations += more.iterations;
    best_run.converged = more.converged;
    best_run.reason = more.reason;
    if (more.q <= best_run.q * (1.0 + 1e-13)) {
      best_run.u = std::move(more.u);
      best_run.q = more.q;
    }
  }

  std::vector<double> u = best_run.u;
  const double f = std::pow(cp.cell_volume(), -1.0 / p);
  for (auto& x : u) x *= f;
  res.field = ScalarField(domain, std::move(u));
  res.lambda = rayleigh_quotient(res.field, table);
  res.trace = std::move(best_run.trace);
  res.converged = best_run.converged;
  res.stop_reason = best_run.reason;
  res.iterations = best_run.iterations;
  res.el_residual = el_residual(res.field, table, res.lambda);
  return res;
}

// ---------------------------------------------------------------------------

struct LinftyReport {
  double sup_norm = 0.0;
  double bound_p1 = 0.0;  // (h_s / c_B)^(N/s), c_B = P_s(B) |B|^((s-N)/N)
  double lp_floor = 0.0;  // ||u||_p / |Omega|^(1/p)
};

inline LinftyReport linfty_check(const EigenResult& r, double hs) {
  const int n = r.field.domain.grid().dim;
  LinftyReport out;
  out.sup_norm = r.field.sup_norm();
  out.bound_p1 = std::pow(hs / ball_isoperimetric_constant(n, r.s), n / r.s);
  out.lp_floor = std::pow(r.field.lp_norm_p(r.p), 1.0 / r.p) /
                 std::pow(measure(r.field.domain), 1.0 / r.p);
  return out;
}

struct PSweepPoint {
  double p = 0.0;
  double lambda = 0.0;
  double target_h_s = 0.0;
  double gap = 0.0;  // |lambda - h_s| / h_s
  bool converged = false;
};

/// lambda_{s,p} along p_list against h_s on the same grid. Each solve is also
/// started from the previous eigenfield.
inline std::vector<PSweepPoint> p_to_1_sweep(const GridDomain& domain, double s,
                                             const std::vector<double>& p_list,
                                             std::uint64_t seed = 1,
                                             const EigenOptions& base = {},
                                             const KernelParams& kbase = {}) {
  KernelParams k1 = kbase;
  k1.dim = domain.grid().dim;
  k1.s = s;
  k1.p = 1.0;
  const double hs = solve_cheeger(domain, build_table(k1, domain.grid())).h;
  std::vector<PSweepPoint> out;
  std::vector<double> warm;
  for (double p : p_list) {
    KernelParams kp = k1;
    kp.p = p;
    const KernelTable table = build_table(kp, domain.grid());
    EigenOptions opt = base;
    opt.initial = warm;
    const EigenResult r = solve_eigen(domain, table, seed, opt);
    warm = r.field.values;
    out.push_back({p, r.lambda, hs, std::abs(r.lambda - hs) / hs, r.converged});
  }
  return out;
}

/// |Omega|^(sp/N) lambda(Omega) >= |B|^(sp/N) lambda(B).
inline PairReport faber_krahn_eigen(const EigenResult& omega, const EigenResult& ball) {
  const int n = omega.field.domain.grid().dim;
  const double e = omega.s * omega.p / n;
  return {std::pow(measure(omega.field.domain), e) * omega.lambda,
          std::pow(measure(ball.field.domain), e) * ball.lambda};
}

}  // namespace fcheeger

#endif  // FCHEEGER_EIGENVALUE_HPP
