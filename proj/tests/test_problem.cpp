#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "msfem/expression.hpp"
#include "msfem/mesh.hpp"
#include "msfem/problem.hpp"

using namespace msfem;

namespace {
constexpr double pi = std::numbers::pi;

double divergence(const Problem& p, const Point& x) {
  const double d = 1e-6;
  const auto& b = p.fields.advection;
  return (b(x + Vec2(d, 0)).x() - b(x - Vec2(d, 0)).x()) / (2 * d) +
         (b(x + Vec2(0, d)).y() - b(x - Vec2(0, d)).y()) / (2 * d);
}
}  // namespace

TEST(Testcase1d, PointValues) {
  const double alpha = std::ldexp(1.0, -7);
  const Problem p = testcase_1d(alpha, std::ldexp(1.0, -5));
  EXPECT_DOUBLE_EQ(p.fields.diffusion(Point(0, 0))(0, 0), 0.0234375);
  EXPECT_NEAR(p.fields.load(Point(1.0 / 6.0, 0)), 1.0, 1e-15);
  for (double x : {0.0, 0.3, 0.77, 1.0}) EXPECT_EQ(p.fields.advection(Point(x, 0)), Vec2(1, 0));
  EXPECT_DOUBLE_EQ(p.fields.m, alpha);
  EXPECT_DOUBLE_EQ(p.fields.M, 3 * alpha);
  EXPECT_THROW(testcase_1d(0.0, 0.1), InvalidArgument);
}

TEST(Testcase2dModerate, AdvectionIsUnitAndDivergenceFree) {
  const Problem p = testcase_2d_moderate(0.1, 0.05);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point x(u(rng), u(rng));
    const Vec2 b = p.fields.advection(x);
    if (i < 100) EXPECT_NEAR(b.norm(), 1.0, 1e-12);
    EXPECT_LE(std::abs(divergence(p, x)), 1e-6 * b.norm());
  }
  EXPECT_DOUBLE_EQ(p.fields.load(Point(0, 0)), 2.0);
}

TEST(Testcase2dContrast, Values) {
  const double alpha = 0.01, eps = pi / 150;
  const Problem p = testcase_2d_contrast(alpha, eps);
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const Point x(u(rng), u(rng));
    EXPECT_NEAR(p.fields.advection(x).norm(), 50.0, 1e-12);
    EXPECT_LE(std::abs(divergence(p, x)), 1e-6 * 50.0);
  }
  double lo = 1e300, hi = 0.0;
  for (int j = 0; j <= 600; ++j)
    for (int i = 0; i <= 600; ++i) {
      const double mu = p.fields.diffusion(Point(i / 600.0, j / 600.0))(0, 0);
      lo = std::min(lo, mu);
      hi = std::max(hi, mu);
    }
  EXPECT_NEAR(lo, alpha, 1e-12);
  EXPECT_LE(hi, 101 * alpha * (1 + 1e-15));
  EXPECT_NEAR(p.fields.diffusion(Point(3 * eps, 2.5 * eps))(0, 0), 101 * alpha, 1e-12);
  EXPECT_NEAR(0.5 * (p.fields.m + p.fields.M), 51 * alpha, 1e-15);
}

TEST(Problems, DiffusionWithinRecordedBounds) {
  const std::vector<Problem> problems = {testcase_1d(0.1, 1.0 / 16), testcase_2d_moderate(0.1, 1.0 / 16),
                                         testcase_2d_contrast(0.1, pi / 150)};
  for (const Problem& p : problems) {
    const NestedMeshes t = build_meshes(p.dimension, 2, 6);
    for (const auto& e : t.global.elements) {
      Point c = Point::Zero();
      for (int i = 0; i < p.dimension + 1; ++i) c += t.global.vertices[e[i]];
      c /= p.dimension + 1;
      const Eigen::SelfAdjointEigenSolver<Mat2> es(p.fields.diffusion(c));
      EXPECT_GE(es.eigenvalues().minCoeff(), p.fields.m - 1e-12);
      EXPECT_LE(es.eigenvalues().maxCoeff(), p.fields.M + 1e-12);
    }
  }
}

TEST(Expression, Arithmetic) {
  EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(0, 0, 0, 0), 7.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(0, 0, 0, 0), 512.0);
  EXPECT_DOUBLE_EQ(Expression::parse("-2^2")(0, 0, 0, 0), -4.0);
  EXPECT_DOUBLE_EQ(Expression::parse("2^-1")(0, 0, 0, 0), 0.5);
  EXPECT_DOUBLE_EQ(Expression::parse("(1 - 2) * 3 / 4")(0, 0, 0, 0), -0.75);
  EXPECT_DOUBLE_EQ(Expression::parse("x*y + eps - alpha")(2, 3, 0.5, 0.25), 6.25);
  EXPECT_NEAR(Expression::parse("cos(pi) + sin(pi/2) + exp(0) + sqrt(4)")(0, 0, 0, 0), 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(Expression::parse("1e-3")(0, 0, 0, 0), 1e-3);
}

TEST(Expression, Errors) {
  EXPECT_THROW(Expression::parse("1 +"), InvalidArgument);
  EXPECT_THROW(Expression::parse("foo(x)"), InvalidArgument);
  EXPECT_THROW(Expression::parse("(x"), InvalidArgument);
  EXPECT_THROW(Expression::parse("x y"), InvalidArgument);
}

TEST(CustomProblem, ReproducesTestcase1d) {
  const Problem a = testcase_1d(0.125, 1.0 / 32);
  const Problem b = custom_problem(1, "alpha*(2+cos(2*pi*x/eps))", "1", "0", "sin(3*pi*x)^2", 0.125,
                                   1.0 / 32);
  for (double x : {0.0, 0.1, 0.33, 0.9}) {
    EXPECT_NEAR(a.fields.diffusion(Point(x, 0))(0, 0), b.fields.diffusion(Point(x, 0))(0, 0), 1e-15);
    EXPECT_NEAR(a.fields.load(Point(x, 0)), b.fields.load(Point(x, 0)), 1e-15);
  }
  EXPECT_NEAR(b.fields.m, 0.125, 1e-12);
  EXPECT_NEAR(b.fields.M, 0.375, 1e-12);
}

TEST(Problem, LoadOverrideKeepsDescriptor) {
  const Problem a = testcase_2d_moderate(0.1, 0.1);
  const Problem b = with_load_expression(a, "2");
  EXPECT_EQ(a.descriptor, b.descriptor);
  EXPECT_NE(a.load_descriptor, b.load_descriptor);
  EXPECT_DOUBLE_EQ(b.fields.load(Point(0.3, 0.4)), 2.0);
  EXPECT_THROW(with_boundary(a, 0.0, 1.0), InvalidArgument);
}
