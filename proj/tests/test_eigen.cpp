#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fcheeger/eigenvalue.hpp"

using namespace fcheeger;

namespace {

KernelTable table(const GridSpec& g, double s, double p) {
  KernelParams k;
  k.dim = g.dim;
  k.s = s;
  k.p = p;
  return build_table(k, g);
}

// At p = 2 the quotient is u^T A u / (v u^T u) with
// A = 2 scale (diag(sum_b W_ab + e_a) - W); its smallest eigenpair.
std::pair<double, Eigen::VectorXd> dense_p2(const GridDomain& d, const KernelTable& t) {
  const Coupling cp(t, d);
  const int n = cp.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row = cp.unit_exterior(i);
    for (int j = 0; j < n; ++j)
      if (j != i) {
        a(i, j) = -cp.unit_weight(i, j);
        row += cp.unit_weight(i, j);
      }
    a(i, i) = row;
  }
  a *= 2.0 * cp.scale() / cp.cell_volume();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  return {es.eigenvalues()(0), es.eigenvectors().col(0)};
}

}  // namespace

TEST(Eigen, SingleCellEqualsTheCheegerConstant) {
  const auto g = make_grid_1d(1, 1.0);
  for (double p : {1.2, 1.5, 1.9}) {
    // alpha = 1 + s p is fixed when s p is, so the p = 1 value is 16 at sp = 1/2
    const double s = 0.5 / p;
    const auto r = solve_eigen(GridDomain::full(g), table(g, s, p));
    const double ref = 2.0 * 2.0 / ((0.5) * (1.0 - 0.5));  // 2 L(C, C^c)
    EXPECT_NEAR(r.lambda, ref, 1e-12 * ref) << p;
  }
}

TEST(Eigen, TwoCellsClosedFormAtP2) {
  // Omega = [0, 2], s = 0.4: constant field, lambda = 2 L(C_1, Omega^c)
  // = 2 * 2^(2 - a) / ((a - 1)(2 - a)) with a = 1.8
  const auto g = make_grid_1d(2, 1.0);
  const auto r = solve_eigen(GridDomain::full(g), table(g, 0.4, 2.0));
  const double a = 1.8;
  const double ref = 2.0 * std::pow(2.0, 2.0 - a) / ((a - 1.0) * (2.0 - a));
  EXPECT_NEAR(r.lambda, ref, 1e-10 * ref);
  EXPECT_NEAR(r.field.values[0], r.field.values[1], 1e-6);
}

TEST(Eigen, DenseGeneralizedEigenproblemAtP2) {
  std::mt19937_64 rng(31);
  struct Case {
    GridSpec g;
    double s;
  };
  for (const auto& [g, s] : {Case{make_grid_1d(12, 1.0 / 12), 0.3}, Case{make_grid_2d(6, 5, 0.2), 0.45},
                             Case{make_grid_2d(7, 7, 1.0 / 7), 0.2}}) {
    CellMask m(g.cell_count(), 1);
    if (g.dim == 2) m[rng() % m.size()] = 0;
    const GridDomain d(g, m);
    const auto t = table(g, s, 2.0);
    const auto [lam, vec] = dense_p2(d, t);
    const auto r = solve_eigen(d, t);
    EXPECT_NEAR(r.lambda, lam, 1e-9 * lam);
    EXPECT_LE(r.el_residual, 1e-6);
    // same direction as the dense eigenvector
    Eigen::VectorXd u = Eigen::Map<const Eigen::VectorXd>(r.field.values.data(), r.field.values.size());
    const double cosang = std::abs(u.dot(vec)) / (u.norm() * vec.norm());
    EXPECT_NEAR(cosang, 1.0, 1e-8);
  }
}

TEST(Eigen, FieldIsNormalizedNonnegativeAndConsistent) {
  const auto g = make_grid_2d(5, 5, 0.2);
  const auto d = GridDomain::full(g);
  for (double p : {1.3, 2.0}) {
    const auto t = table(g, 0.4, p);
    const auto r = solve_eigen(d, t, 7);
    EXPECT_NEAR(r.field.lp_norm_p(p), 1.0, 1e-12);
    EXPECT_NEAR(rayleigh_quotient(r.field, t), r.lambda, 1e-10 * r.lambda);
    EXPECT_NEAR(seminorm(r.field, t), r.lambda, 1e-10 * r.lambda);
    const double sign = r.field.values[0] >= 0.0 ? 1.0 : -1.0;
    for (double x : r.field.values) EXPECT_GE(sign * x, 0.0);
    ASSERT_FALSE(r.trace.empty());
    for (double q : r.trace) EXPECT_GE(q, r.lambda * (1 - 1e-12));
    EXPECT_TRUE(r.converged) << r.stop_reason;
    EXPECT_EQ(r.restart_values.size(), 6u);
  }
}

TEST(Eigen, AbsoluteValueLowersTheQuotient) {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  const auto g = make_grid_2d(5, 4, 0.25);
  const auto d = GridDomain::full(g);
  const auto t = table(g, 0.4, 1.7);
  for (int k = 0; k < 50; ++k) {
    std::vector<double> v(d.cell_count()), a(d.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::abs(v[i] = U(rng));
    EXPECT_LE(rayleigh_quotient(ScalarField(d, a), t), rayleigh_quotient(ScalarField(d, v), t) * (1 + 1e-12));
  }
}

TEST(Eigen, ScalesLikeLengthToMinusSp) {
  const auto g = make_grid_2d(5, 4, 0.25);
  CellMask m(g.cell_count(), 1);
  m[0] = 0;
  const GridDomain d(g, m);
  for (auto [s, p] : {std::pair{0.3, 1.5}, {0.45, 2.0}}) {
    const double a = solve_eigen(d, table(g, s, p)).lambda;
    const auto d2 = d.rescaled(2.0);
    const double b = solve_eigen(d2, table(d2.grid(), s, p)).lambda;
    EXPECT_NEAR(b / a, std::pow(2.0, -s * p), 1e-8);
  }
}

TEST(Eigen, AbovePoincareBound) {
  for (auto [s, p] : {std::pair{0.3, 1.5}, {0.45, 2.0}, {0.2, 1.2}}) {
    const auto d = GridDomain::full(make_grid_2d(6, 4, 0.25));
    const auto r = solve_eigen(d, table(d.grid(), s, p));
    EXPECT_GE(r.lambda, 1.0 / poincare_constant(d, s, p));
  }
}

TEST(Eigen, LinftyReport) {
  const auto g = make_grid_1d(8, 1.0 / 8);
  const auto d = GridDomain::full(g);
  const auto r = solve_eigen(d, table(g, 0.4, 1.5));
  const double hs = solve_cheeger(d, table(g, 0.4, 1.0)).h;
  const auto rep = linfty_check(r, hs);
  EXPECT_NEAR(rep.lp_floor, 1.0, 1e-12);  // unit measure and unit norm
  EXPECT_GE(rep.sup_norm, rep.lp_floor);
  EXPECT_GT(rep.bound_p1, 0.0);
}

TEST(Eigen, PToOneSweepApproachesTheCheegerConstant) {
  const auto g = make_grid_1d(8, 1.0 / 8);
  const auto sw = p_to_1_sweep(GridDomain::full(g), 0.45, {2.0, 1.5, 1.25, 1.1, 1.05});
  ASSERT_EQ(sw.size(), 5u);
  // the kernel exponent moves with p, so the gap need not shrink monotonically
  EXPECT_GT(sw.front().gap, 0.5);
  EXPECT_LT(sw.back().gap, 0.05);
  for (const auto& pt : sw) EXPECT_TRUE(pt.converged) << pt.p;
  for (const auto& pt : sw) EXPECT_NEAR(pt.target_h_s, 4.0 / (0.45 * 0.55), 1e-10);
}

TEST(Eigen, FaberKrahnDiskAndSquare) {
  // small s p: the square's value converges slowly when s p nears 1
  const double s = 0.2, p = 2.0;
  const auto g = make_grid_2d(16, 16, 1.0 / 8, {-1.0, -1.0});
  const auto t = table(g, s, p);
  const auto sq = solve_eigen(GridDomain::full(g), t);
  const auto disk = solve_eigen(rasterize(ball_shape({0.0, 0.0}, 1.0), g), t);
  const auto fk = faber_krahn_eigen(sq, disk);
  EXPECT_GT(fk.lhs, fk.rhs);
}

TEST(Eigen, FaberKrahnTwoIntervalsAgainstOne) {
  const double s = 0.35, p = 1.6;
  const auto g = make_grid_1d(16, 0.125);
  CellMask two(16, 0), one(16, 0);
  for (int i = 0; i < 4; ++i) two[i] = two[12 + i] = 1;
  for (int i = 4; i < 12; ++i) one[i] = 1;
  const auto t = table(g, s, p);
  const auto fk = faber_krahn_eigen(solve_eigen(GridDomain(g, two), t), solve_eigen(GridDomain(g, one), t));
  EXPECT_GT(fk.lhs, fk.rhs);
}

TEST(Eigen, DeterministicForAFixedSeed) {
  const auto g = make_grid_2d(4, 4, 0.25);
  const auto t = table(g, 0.3, 1.5);
  const auto a = solve_eigen(GridDomain::full(g), t, 9);
  const auto b = solve_eigen(GridDomain::full(g), t, 9);
  EXPECT_EQ(a.lambda, b.lambda);
  EXPECT_EQ(a.field.values, b.field.values);
}

TEST(Eigen, RejectsP1AndBadStarts) {
  const auto g = make_grid_1d(4, 0.25);
  EXPECT_THROW(solve_eigen(GridDomain::full(g), table(g, 0.5, 1.0)), ConfigError);
  EigenOptions o;
  o.initial = {1.0, 2.0};
  EXPECT_THROW(solve_eigen(GridDomain::full(g), table(g, 0.3, 1.5), 1, o), ConfigError);
}
