#pragma once

#include <functional>
#include <string>

#include "msfem/types.hpp"

namespace msfem {

struct CoefficientField {
  std::function<Mat2(const Point&)> diffusion;
  std::function<Vec2(const Point&)> advection;
  std::function<double(const Point&)> load;
  double epsilon = 1.0;
  double alpha = 1.0;
  double m = 1.0;  // coercivity constant
  double M = 1.0;  // bound
};

struct Problem {
  int dimension = 2;
  CoefficientField fields;
  double u0 = 0.0;  // 1D boundary values
  double u1 = 0.0;
  // Identifies A, b and boundary data; the load is tracked separately so
  // offline results can be reused across loads.
  std::string descriptor;
  std::string load_descriptor;

  bool homogeneous() const { return u0 == 0.0 && u1 == 0.0; }
};

// Scalar diffusion used for Peclet numbers: trace / 2 (1D fields store a*I).
inline double scalar_diffusion(const Mat2& a) { return 0.5 * a.trace(); }

Problem testcase_1d(double alpha, double eps);
Problem testcase_2d_moderate(double alpha, double eps);
Problem testcase_2d_contrast(double alpha, double eps);

// A = m*I, b and f constant.
Problem constant_problem(int dimension, double m, const Vec2& b, double f);

// Scalar diffusion and advection components given as expressions.
Problem custom_problem(int dimension, const std::string& diffusion, const std::string& advection_x,
                       const std::string& advection_y, const std::string& load, double alpha,
                       double eps);

Problem with_load(Problem p, std::function<double(const Point&)> load, std::string descriptor);
Problem with_load_expression(Problem p, const std::string& expression);
Problem with_boundary(Problem p, double u0, double u1);
// Same diffusion, no advection: the operator behind MsFEM-lin basis functions.
CoefficientField diffusion_only(const CoefficientField& fields);

}  // namespace msfem
