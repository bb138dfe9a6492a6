#include "msfem/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "msfem/expression.hpp"

namespace msfem {

namespace {

constexpr double pi = std::numbers::pi;

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(17);
  s << v;
  return s.str();
}

void check_positive(double alpha, double eps) {
  if (!(alpha > 0.0) || !(eps > 0.0)) throw InvalidArgument("alpha and eps must be positive");
}

double load_2d(const Point& p) {
  return 2.0 + std::sin(2.0 * pi * p.x()) + p.x() * std::cos(2.0 * pi * p.y());
}

}  // namespace

Problem testcase_1d(double alpha, double eps) {
  check_positive(alpha, eps);
  Problem p;
  p.dimension = 1;
  auto& f = p.fields;
  f.alpha = alpha;
  f.epsilon = eps;
  f.m = alpha;
  f.M = 3.0 * alpha;
  f.diffusion = [alpha, eps](const Point& x) {
    return Mat2(alpha * (2.0 + std::cos(2.0 * pi * x.x() / eps)) * Mat2::Identity());
  };
  f.advection = [](const Point&) { return Vec2(1.0, 0.0); };
  f.load = [](const Point& x) {
    const double s = std::sin(3.0 * pi * x.x());
    return s * s;
  };
  p.descriptor = "testcase_1d alpha=" + fmt(alpha) + " eps=" + fmt(eps);
  p.load_descriptor = "sin(3*pi*x)^2";
  return p;
}

Problem testcase_2d_moderate(double alpha, double eps) {
  check_positive(alpha, eps);
  Problem p;
  p.dimension = 2;
  auto& f = p.fields;
  f.alpha = alpha;
  f.epsilon = eps;
  f.m = 0.25 * alpha;
  f.M = 1.75 * alpha;
  f.diffusion = [alpha, eps](const Point& x) {
    const double mu =
        alpha * (1.0 + 0.75 * std::cos(2.0 * pi * x.x() / eps) * std::sin(2.0 * pi * x.y() / eps));
    return Mat2(mu * Mat2::Identity());
  };
  f.advection = [](const Point& q) {
    const double x = q.x(), y = q.y();
    const double s = std::sqrt(5.0 + 2.0 * y - 4.0 * x + y * y + x * x);
    return Vec2((1.0 + y) / s, (2.0 - x) / s);
  };
  f.load = load_2d;
  p.descriptor = "testcase_2d_moderate alpha=" + fmt(alpha) + " eps=" + fmt(eps);
  p.load_descriptor = "2+sin(2*pi*x)+x*cos(2*pi*y)";
  return p;
}

Problem testcase_2d_contrast(double alpha, double eps) {
  check_positive(alpha, eps);
  Problem p;
  p.dimension = 2;
  auto& f = p.fields;
  f.alpha = alpha;
  f.epsilon = eps;
  f.m = alpha;
  f.M = 101.0 * alpha;
  f.diffusion = [alpha, eps](const Point& x) {
    const double c = std::cos(pi * x.x() / eps), s = std::sin(pi * x.y() / eps);
    return Mat2(alpha * (1.0 + 100.0 * c * c * s * s) * Mat2::Identity());
  };
  const Vec2 b = 50.0 * Vec2(std::cos(0.3 * pi), std::sin(0.3 * pi));
  f.advection = [b](const Point&) { return b; };
  f.load = load_2d;
  p.descriptor = "testcase_2d_contrast alpha=" + fmt(alpha) + " eps=" + fmt(eps);
  p.load_descriptor = "2+sin(2*pi*x)+x*cos(2*pi*y)";
  return p;
}

Problem constant_problem(int dimension, double m, const Vec2& b, double load) {
  if (!(m > 0.0)) throw InvalidArgument("diffusion must be positive");
  Problem p;
  p.dimension = dimension;
  auto& f = p.fields;
  f.alpha = m;
  f.epsilon = 1.0;
  f.m = f.M = m;
  f.diffusion = [m](const Point&) { return Mat2(m * Mat2::Identity()); };
  const Vec2 bb = dimension == 1 ? Vec2(b.x(), 0.0) : b;
  f.advection = [bb](const Point&) { return bb; };
  f.load = [load](const Point&) { return load; };
  p.descriptor = "constant d=" + std::to_string(dimension) + " m=" + fmt(m) + " b=" + fmt(bb.x()) +
                 "," + fmt(bb.y());
  p.load_descriptor = fmt(load);
  return p;
}

Problem custom_problem(int dimension, const std::string& diffusion, const std::string& advection_x,
                       const std::string& advection_y, const std::string& load, double alpha,
                       double eps) {
  check_positive(alpha, eps);
  if (dimension != 1 && dimension != 2) throw InvalidArgument("dimension must be 1 or 2");
  const Expression a = Expression::parse(diffusion);
  const Expression bx = Expression::parse(advection_x);
  const Expression by = dimension == 2 ? Expression::parse(advection_y) : Expression::parse("0");
  const Expression f = Expression::parse(load);
  Problem p;
  p.dimension = dimension;
  auto& c = p.fields;
  c.alpha = alpha;
  c.epsilon = eps;
  c.diffusion = [a, alpha, eps](const Point& x) {
    return Mat2(a(x.x(), x.y(), eps, alpha) * Mat2::Identity());
  };
  c.advection = [bx, by, alpha, eps](const Point& x) {
    return Vec2(bx(x.x(), x.y(), eps, alpha), by(x.x(), x.y(), eps, alpha));
  };
  c.load = [f, alpha, eps](const Point& x) { return f(x.x(), x.y(), eps, alpha); };
  // Bounds are not known in closed form; sample them.
  const int n = 256;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (int j = 0; j <= (dimension == 2 ? n : 0); ++j)
    for (int i = 0; i <= n; ++i) {
      const double v = a(double(i) / n, double(j) / n, eps, alpha);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo > 0.0)) throw InvalidArgument("custom diffusion is not positive on the sample grid");
  c.m = lo;
  c.M = hi;
  p.descriptor = "custom d=" + std::to_string(dimension) + " A=" + diffusion + " bx=" + advection_x +
                 " by=" + (dimension == 2 ? advection_y : std::string("0")) +
                 " alpha=" + fmt(alpha) + " eps=" + fmt(eps);
  p.load_descriptor = load;
  return p;
}

Problem with_load(Problem p, std::function<double(const Point&)> load, std::string descriptor) {
  p.fields.load = std::move(load);
  p.load_descriptor = std::move(descriptor);
  return p;
}

Problem with_load_expression(Problem p, const std::string& expression) {
  const Expression f = Expression::parse(expression);
  const double eps = p.fields.epsilon, alpha = p.fields.alpha;
  return with_load(
      std::move(p), [f, eps, alpha](const Point& x) { return f(x.x(), x.y(), eps, alpha); },
      expression);
}

Problem with_boundary(Problem p, double u0, double u1) {
  if (p.dimension != 1 && (u0 != 0.0 || u1 != 0.0))
    throw InvalidArgument("nonhomogeneous boundary values are only supported in 1D");
  p.u0 = u0;
  p.u1 = u1;
  p.descriptor += " u0=" + fmt(u0) + " u1=" + fmt(u1);
  return p;
}

CoefficientField diffusion_only(const CoefficientField& fields) {
  CoefficientField out = fields;
  out.advection = [](const Point&) { return Vec2::Zero().eval(); };
  return out;
}

}  // namespace msfem
