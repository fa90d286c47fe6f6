#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "ldtail/field.hpp"
#include "ldtail/grid.hpp"
#include "ldtail/random.hpp"

using namespace ldtail;

TEST(Grid, OneDimensionalTrapezoidWeights) {
  auto g = build_grid({{0.0, 1.0}}, {5});
  ASSERT_EQ(g->size(), 5u);
  EXPECT_DOUBLE_EQ(g->h(0), 0.25);
  const double nodes[] = {0.0, 0.25, 0.5, 0.75, 1.0};
  const double weights[] = {0.125, 0.25, 0.25, 0.25, 0.125};
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_DOUBLE_EQ(g->node(i)[0], nodes[i]);
    EXPECT_DOUBLE_EQ(g->weights()[i], weights[i]);
  }
  EXPECT_TRUE(g->is_boundary(0));
  EXPECT_TRUE(g->is_boundary(4));
  EXPECT_FALSE(g->is_boundary(2));
}

TEST(Grid, TensorWeightsIn2D) {
  auto g = build_grid({{0.0, 1.0}, {0.0, 1.0}}, {3, 3});
  ASSERT_EQ(g->size(), 9u);
  EXPECT_DOUBLE_EQ(g->weights()[0], 0.0625);
  EXPECT_DOUBLE_EQ(g->weights()[4], 0.25);
  EXPECT_DOUBLE_EQ(g->weights()[1], 0.125);
  // axis 0 fastest
  EXPECT_DOUBLE_EQ(g->node(1)[0], 0.5);
  EXPECT_DOUBLE_EQ(g->node(1)[1], 0.0);
  EXPECT_DOUBLE_EQ(g->node(3)[1], 0.5);
  EXPECT_FALSE(g->is_boundary(4));
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 7, 8}) EXPECT_TRUE(g->is_boundary(i));
}

TEST(Grid, WeightsSumToMeasure) {
  for (auto g : {build_grid({{0.0, 2.0}}, {3}), build_grid({{-1.0, 0.5}}, {17}),
                 build_grid({{0.0, 1.0}, {2.0, 5.0}}, {9, 13})}) {
    auto q = g->weights();
    const double s = std::accumulate(q.begin(), q.end(), 0.0);
    EXPECT_NEAR(s, g->measure(), 1e-12 * g->measure());
  }
  EXPECT_DOUBLE_EQ(build_grid({{0.0, 2.0}}, {3})->measure(), 2.0);
}

TEST(Grid, RejectsDegenerateInput) {
  EXPECT_THROW(build_grid({{0.0, 1.0}}, {2}), InvalidArgument);
  EXPECT_THROW(build_grid({{1.0, 1.0}}, {5}), InvalidArgument);
  EXPECT_THROW(build_grid({{1.0, 0.0}}, {5}), InvalidArgument);
  EXPECT_THROW(build_grid({{0.0, 1.0}}, {5, 5}), InvalidArgument);
}

TEST(Quadrature, ConstantAndLinearAreExact) {
  auto g = build_grid({{0.0, 1.0}}, {5});
  EXPECT_DOUBLE_EQ(quadrature(*g, ScalarField(g, 1.0)), 1.0);
  for (std::size_t n : {3u, 4u, 7u, 64u, 101u}) {
    auto gn = build_grid({{0.0, 1.0}}, {n});
    auto x = ScalarField::from_function(gn, [](const Point& p) { return p[0]; });
    EXPECT_NEAR(quadrature(*gn, x), 0.5, 1e-15);
  }
}

TEST(Quadrature, AffineExactOnRandomBoxes) {
  RandomStream rs(3);
  for (int t = 0; t < 20; ++t) {
    const double lo0 = rs.normal(), lo1 = rs.normal();
    const double hi0 = lo0 + 0.5 + std::abs(rs.normal()), hi1 = lo1 + 0.5 + std::abs(rs.normal());
    const double c0 = rs.normal(), c1 = rs.normal(), c2 = rs.normal();
    auto g = build_grid({{lo0, hi0}, {lo1, hi1}}, {5 + std::size_t(t % 7), 3 + std::size_t(t % 5)});
    auto w = ScalarField::from_function(g, [&](const Point& p) { return c0 + c1 * p[0] + c2 * p[1]; });
    const double exact = (hi0 - lo0) * (hi1 - lo1) * (c0 + c1 * 0.5 * (lo0 + hi0) + c2 * 0.5 * (lo1 + hi1));
    EXPECT_NEAR(quadrature(*g, w), exact, 1e-13 * std::max(1.0, std::abs(exact)));
  }
}

TEST(Quadrature, QuadraticWithinTrapezoidBound) {
  auto g = build_grid({{0.0, 1.0}}, {101});
  auto w = ScalarField::from_function(g, [](const Point& p) { return p[0] * p[0]; });
  EXPECT_NEAR(quadrature(*g, w), 1.0 / 3.0, 2e-4);
}

TEST(Quadrature, SecondOrderUnderRefinement) {
  auto err = [](std::size_t n) {
    auto g = build_grid({{0.0, 1.0}}, {n});
    auto w = ScalarField::from_function(g, [](const Point& p) { return std::exp(p[0]); });
    return std::abs(quadrature(*g, w) - (std::exp(1.0) - 1.0));
  };
  const double ratio = err(33) / err(65);
  EXPECT_NEAR(ratio, 4.0, 0.1);
}

TEST(InnerProduct, MatchesDirectSum) {
  auto g = build_grid({{0.0, 1.0}}, {5});
  EXPECT_DOUBLE_EQ(inner_product(*g, ScalarField(g, 1.0), ScalarField(g, 1.0)), 1.0);
  auto x = ScalarField::from_function(g, [](const Point& p) { return p[0]; });
  EXPECT_DOUBLE_EQ(inner_product(*g, x, ScalarField(g, 1.0)), 0.5);

  auto g2 = build_grid({{0.0, 1.0}}, {37});
  auto v = ScalarField::from_function(g2, [](const Point& p) { return std::sin(3.0 * p[0]) + 0.2; });
  double direct = 0.0;
  for (std::size_t i = 0; i < g2->size(); ++i) direct += g2->weights()[i] * v[i] * v[i];
  EXPECT_NEAR(inner_product(*g2, v, v), direct, 1e-15);
}

TEST(InnerProduct, SymmetricBilinearPositive) {
  auto g = build_grid({{0.0, 1.0}, {0.0, 1.0}}, {7, 6});
  RandomStream rs(11);
  auto rnd = [&] {
    ScalarField f(g);
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = rs.normal();
    return f;
  };
  for (int t = 0; t < 20; ++t) {
    auto u = rnd(), v = rnd(), w = rnd();
    const double a = rs.normal();
    EXPECT_NEAR(inner_product(*g, u, v), inner_product(*g, v, u), 1e-15);
    EXPECT_NEAR(inner_product(*g, a * u + v, w), a * inner_product(*g, u, w) + inner_product(*g, v, w), 1e-13);
    EXPECT_GE(inner_product(*g, w, w), 0.0);
  }
}

TEST(InnerProduct, RejectsSizeMismatch) {
  auto g = build_grid({{0.0, 1.0}}, {5});
  auto h = build_grid({{0.0, 1.0}}, {6});
  EXPECT_THROW(inner_product(*g, ScalarField(g), ScalarField(h)), InvalidArgument);
  EXPECT_THROW(quadrature(*g, ScalarField(h)), InvalidArgument);
}
