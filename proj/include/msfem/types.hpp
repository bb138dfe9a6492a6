#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace msfem {

using Index = std::int64_t;
using Point = Eigen::Vector2d;  // 1D points keep y = 0
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when a factorization hits a zero or negligible pivot.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

// An affine function c + g.x on a coarse element.
struct Affine {
  double c = 0.0;
  Vec2 g = Vec2::Zero();

  double operator()(const Point& p) const { return c + g.dot(p); }
};

}  // namespace msfem
