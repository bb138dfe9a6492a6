#pragma once

#include <memory>
#include <string>

#include "msfem/types.hpp"

namespace msfem {

struct ExprNode;

// Closed-form scalar expression over x, y with constants pi, eps, alpha.
// Grammar: + - * / ^ (right associative), unary minus, parentheses,
// functions cos sin exp sqrt.
class Expression {
 public:
  Expression() = default;
  static Expression parse(const std::string& text);

  double operator()(double x, double y, double eps, double alpha) const;
  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }

 private:
  std::shared_ptr<const ExprNode> root_;
  std::string text_;
};

}  // namespace msfem
