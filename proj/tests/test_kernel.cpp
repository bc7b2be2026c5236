#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss.hpp>

#include "fcheeger/kernel.hpp"

using namespace fcheeger;

namespace {

KernelParams params(int dim, double s, double p = 1.0, double R = 0.0) {
  KernelParams k;
  k.dim = dim;
  k.s = s;
  k.p = p;
  k.truncation_radius = R;
  return k;
}

// Second difference of F(t) = t^(2-a) / ((1-a)(2-a)) in long double.
double oracle_1d(double a, long k) {
  auto F = [a](long double t) {
    return std::pow(t, 2.0L - a) / ((1.0L - a) * (2.0L - a));
  };
  return static_cast<double>(F(k + 1) - 2 * F(k) + F(k - 1));
}

// Plain 4D tensor Gauss-Legendre on two unit squares; accurate for pairs a
// few cells apart.
double oracle_2d_far(double a, int dx, int dy) {
  using G = boost::math::quadrature::gauss<double, 20>;
  return G::integrate(
      [&](double x1) {
        return G::integrate(
            [&](double y1) {
              return G::integrate(
                  [&](double x2) {
                    return G::integrate(
                        [&](double y2) {
                          const double u = x2 + dx - x1, v = y2 + dy - y1;
                          return std::pow(u * u + v * v, -0.5 * a);
                        },
                        0.0, 1.0);
                  },
                  0.0, 1.0);
            },
            0.0, 1.0);
      },
      0.0, 1.0);
}

}  // namespace

TEST(Params, Validation) {
  EXPECT_NO_THROW(params(1, 0.5).validate());
  EXPECT_THROW(params(3, 0.5).validate(), ConfigError);
  EXPECT_THROW(params(1, 1.0).validate(), ConfigError);
  EXPECT_THROW(params(1, 0.5, 0.5).validate(), ConfigError);
  EXPECT_THROW(params(1, 0.5, 2.0).validate(), ConfigError);  // s p = 1
  EXPECT_DOUBLE_EQ(params(2, 0.3, 2.0).alpha(), 2.6);
}

TEST(PairWeight, OneDimensionalExample) {
  // Cells [0,1] and [2,3] at alpha = 1.5.
  const double w = cell_pair_weight(params(1, 0.5), {2, 0}, 1.0);
  const double expect = 2.0 * (2.0 * (std::sqrt(2.0) - 1.0) - 2.0 * (std::sqrt(3.0) - std::sqrt(2.0)));
  EXPECT_NEAR(w, expect, 1e-13);
  EXPECT_NEAR(w, 0.385505268709, 1e-11);
}

TEST(PairWeight, OneDimensionalExactForAllOffsets) {
  for (double s : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    for (long k = 1; k <= 200; ++k) {
      const double w = cell_pair_weight(params(1, s), {static_cast<int>(k), 0}, 1.0);
      EXPECT_NEAR(w, oracle_1d(1.0 + s, k), 1e-12 * oracle_1d(1.0 + s, k)) << s << ' ' << k;
    }
  }
}

TEST(PairWeight, TwoDimensionalReferenceValues) {
  // Arbitrary-precision reference values at alpha = 2.5.
  const auto kp = params(2, 0.5);
  EXPECT_NEAR(cell_pair_weight(kp, {1, 0}, 1.0), 3.6470875155, 1e-9);
  EXPECT_NEAR(cell_pair_weight(kp, {1, 1}, 1.0), 0.676008398686, 1e-11);
  EXPECT_NEAR(cell_pair_weight(kp, {3, 1}, 1.0), 0.0593724758980, 1e-12);
  EXPECT_NEAR(cell_pair_weight(kp, {9, 2}, 1.0), 0.00389850121278, 1e-13);
}

TEST(PairWeight, TwoDimensionalMatchesTensorGauss) {
  for (double a : {2.2, 2.5, 2.9}) {
    const auto kp = params(2, a - 2.0);
    for (auto [dx, dy] : {std::pair{3, 0}, {4, 2}, {5, 5}, {7, 1}}) {
      const double ref = oracle_2d_far(a, dx, dy);
      EXPECT_NEAR(cell_pair_weight(kp, {dx, dy}, 1.0), ref, 1e-8 * ref);
    }
  }
}

TEST(PairWeight, SymmetryAndScaling) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    const int dx = static_cast<int>(rng() % 9) - 4, dy = static_cast<int>(rng() % 9) - 4;
    if (!dx && !dy) continue;
    const auto kp = params(2, 0.35, 2.0);
    const double w = cell_pair_weight(kp, {dx, dy}, 1.0);
    EXPECT_DOUBLE_EQ(w, cell_pair_weight(kp, {-dx, -dy}, 1.0));
    EXPECT_DOUBLE_EQ(w, cell_pair_weight(kp, {dy, dx}, 1.0));
    const double t3 = cell_pair_weight(kp, {dx, dy}, 3.0);
    EXPECT_NEAR(t3 / w, std::pow(3.0, 4.0 - kp.alpha()), 1e-12);
  }
  EXPECT_THROW(cell_pair_weight(params(2, 0.5), {0, 0}, 1.0), ConfigError);
  EXPECT_THROW(cell_pair_weight(params(1, 0.5), {1, 1}, 1.0), ConfigError);
}

TEST(PairWeight, NearFieldRefinementIsConverged) {
  for (double s : {0.2, 0.5, 0.9}) {
    for (auto [dx, dy] : {std::pair{1, 0}, {1, 1}, {2, 1}, {2, 0}}) {
      auto kp = params(2, s);
      kp.near_field_levels = 1;
      const double a = cell_pair_weight(kp, {dx, dy}, 1.0);
      kp.near_field_levels = 2;
      const double b = cell_pair_weight(kp, {dx, dy}, 1.0);
      EXPECT_LT(std::abs(a - b), 1e-7 * b);
    }
  }
}

TEST(Complement, UnitIntervalInteractsEightAtHalf) {
  EXPECT_NEAR(cell_complement_interaction(params(1, 0.5), 1.0), 8.0, 1e-12);
  // Closed form 2 / ((a-1)(2-a)) h^(2-a).
  EXPECT_NEAR(cell_complement_interaction(params(1, 0.3), 2.0),
              2.0 / (0.3 * 0.7) * std::pow(2.0, 0.7), 1e-12);
}

TEST(Complement, TwoDimensionalReference) {
  EXPECT_NEAR(cell_complement_interaction(params(2, 0.5), 1.0), 27.2119083603, 1e-8);
}

TEST(Table, EntriesMatchPairWeights) {
  const auto g = make_grid_2d(6, 5, 0.2);
  const auto kp = params(2, 0.4);
  const auto t = build_table(kp, g);
  EXPECT_FALSE(t.has(0, 0));
  for (const auto& o : t.offsets()) {
    EXPECT_NEAR(t.weight(o), cell_pair_weight(kp, o, 0.2), 1e-14 * t.weight(o));
    EXPECT_GT(t.weight(o), 0.0);
  }
  // Every pair of grid cells is covered by the default radius.
  EXPECT_TRUE(t.has(5, 4));
  EXPECT_TRUE(t.has(-5, -4));
}

TEST(Table, WeightsDecreaseWithDistance) {
  const auto t = build_table(params(2, 0.6), make_grid_2d(8, 8, 1.0));
  const auto offs = t.offsets();
  for (const auto& a : offs)
    for (const auto& b : offs) {
      const double ra = std::hypot(a[0], a[1]), rb = std::hypot(b[0], b[1]);
      if (ra >= 2.0 && rb > ra + 1.5) EXPECT_GT(t.weight(a), t.weight(b));
    }
  const auto t1 = build_table(params(1, 0.6), make_grid_1d(20, 1.0));
  for (int k = 1; k < 20; ++k) EXPECT_GT(t1.weight(k, 0), t1.weight(k + 1, 0));
}

TEST(Table, TabulatedSumPlusTailIsTheCellComplement) {
  const auto t = build_table(params(1, 0.5, 1.0, 10.0), make_grid_1d(40, 1.0));
  double sum = 0.0;
  for (const auto& o : t.offsets()) sum += t.weight(o);
  EXPECT_NEAR(sum + t.tail(), 8.0, 1e-4 * 8.0);
}

TEST(Table, TailCloseToRadialEstimate) {
  // 2 * (0.5)^-1 * (10 h)^-0.5 * h per unit cell at alpha = 1.5.
  const auto kp = params(1, 0.5, 1.0, 10.0);
  EXPECT_NEAR(radial_tail_estimate(kp, 10.0, 1.0), 2.0 / 0.5 * std::pow(10.0, -0.5), 1e-14);
  const auto t = build_table(kp, make_grid_1d(40, 1.0));
  EXPECT_NEAR(t.tail(), radial_tail_estimate(kp, 10.0, 1.0), 0.05 * t.tail());
}

TEST(Table, LargerRadiusKeepsComplementInteraction) {
  // Exact whenever every pair inside X is tabulated: a single cell, or a set
  // whose offsets all lie within the smaller radius.
  const auto g = make_grid_2d(8, 8, 0.125);
  const auto a = build_table(params(2, 0.5, 1.0, 3.0 * 0.125), g);
  const auto b = build_table(params(2, 0.5, 1.0, 6.0 * 0.125), g);
  CellMask one(g.cell_count(), 0), block(g.cell_count(), 0);
  one[g.index(4, 4)] = 1;
  for (int i = 0; i < g.cell_count(); ++i) {
    const auto c = g.coords(i);
    block[i] = c[0] >= 2 && c[0] < 5 && c[1] >= 3 && c[1] < 6 && !(c[0] == 2 && c[1] == 3);
  }
  for (const auto& x : {one, block}) {
    const double la = exterior_interaction(a, g, x, x);
    const double lb = exterior_interaction(b, g, x, x);
    EXPECT_LT(std::abs(la - lb), 1e-12 * lb);
  }
}

TEST(Table, RejectsSmallRadiusAndMismatch) {
  EXPECT_THROW(build_table(params(1, 0.5, 1.0, 2.0), make_grid_1d(10, 1.0)), ConfigError);
  EXPECT_THROW(build_table(params(2, 0.5), make_grid_1d(10, 1.0)), ConfigError);
  EXPECT_NO_THROW(build_table(params(2, 0.5), make_grid_2d(1, 1, 1.0)));
}

TEST(Interaction, SymmetricAndAdditive) {
  std::mt19937_64 rng(5);
  const auto g = make_grid_2d(7, 6, 0.3);
  const auto t = build_table(params(2, 0.45), g);
  for (int k = 0; k < 20; ++k) {
    CellMask a(g.cell_count(), 0), b(g.cell_count(), 0), c(g.cell_count(), 0),
        bc(g.cell_count(), 0);
    for (int i = 0; i < g.cell_count(); ++i) {
      const auto r = rng() % 4;
      a[i] = r == 1;
      b[i] = r == 2;
      c[i] = r == 3;
      bc[i] = r >= 2;
    }
    const double ab = interaction(t, g, a, b);
    EXPECT_NEAR(ab, interaction(t, g, b, a), 1e-12 * ab);
    EXPECT_NEAR(interaction(t, g, a, bc), ab + interaction(t, g, a, c), 1e-12 * ab);
  }
  CellMask a(g.cell_count(), 0);
  a[0] = 1;
  EXPECT_THROW(interaction(t, g, a, a), ConfigError);
}

TEST(Interaction, UnitIntervalWithItsComplement) {
  for (int n : {1, 3, 10}) {
    const auto g = make_grid_1d(n, 1.0 / n);
    const auto t = build_table(params(1, 0.5), g);
    const CellMask all(n, 1);
    EXPECT_NEAR(exterior_interaction(t, g, all, all), 8.0, 1e-12);
  }
}

TEST(Interaction, ComplementSplitsIntoDomainPartAndExterior) {
  // L(A, R^N \ A) = L(A, X \ A) + L(A, R^N \ X) for A inside X.
  const auto g = make_grid_2d(6, 6, 0.25);
  const auto t = build_table(params(2, 0.7), g);
  CellMask x(36, 0), a(36, 0), xa(36, 0);
  for (int i = 0; i < 36; ++i) {
    x[i] = g.coords(i)[0] + g.coords(i)[1] < 8;
    a[i] = x[i] && g.coords(i)[1] < 2;
    xa[i] = x[i] && !a[i];
  }
  EXPECT_NEAR(exterior_interaction(t, g, a, a),
              interaction(t, g, a, xa) + exterior_interaction(t, g, a, x), 1e-11);
}

TEST(Coupling, MatchesTableByPosition) {
  const auto g = make_grid_2d(4, 3, 0.5);
  CellMask m(12, 1);
  m[5] = 0;
  const GridDomain d(g, m);
  const auto t = build_table(params(2, 0.5), g);
  const Coupling cp(t, d);
  ASSERT_EQ(cp.size(), 11);
  for (int a = 0; a < cp.size(); ++a) {
    EXPECT_EQ(cp.unit_weight(a, a), 0.0);
    for (int b = 0; b < cp.size(); ++b) {
      const auto ca = g.coords(cp.cells()[a]), cb = g.coords(cp.cells()[b]);
      EXPECT_EQ(cp.unit_weight(a, b), t.unit_weight(cb[0] - ca[0], cb[1] - ca[1]));
    }
    // ext_a = complement - sum over the other domain cells
    double row = 0.0;
    for (int b = 0; b < cp.size(); ++b) row += cp.unit_weight(a, b);
    EXPECT_NEAR(cp.unit_exterior(a), t.unit_cell_complement() - row, 1e-12);
  }
}
