#include "msfem/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <vector>

namespace msfem {

struct ExprNode {
  enum class Op { number, x, y, eps, alpha, add, sub, mul, div, pow, neg, cos, sin, exp, sqrt };
  Op op = Op::number;
  double value = 0.0;
  std::shared_ptr<const ExprNode> lhs, rhs;
};

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make(ExprNode::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr, double value = 0.0) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  n->value = value;
  return n;
}

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("expression '" + s_ + "' at column " + std::to_string(pos_ + 1) + ": " +
                          what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (accept('+'))
        n = make(ExprNode::Op::add, n, product());
      else if (accept('-'))
        n = make(ExprNode::Op::sub, n, product());
      else
        return n;
    }
  }

  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (accept('*'))
        n = make(ExprNode::Op::mul, n, unary());
      else if (accept('/'))
        n = make(ExprNode::Op::div, n, unary());
      else
        return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(ExprNode::Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(ExprNode::Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    if (accept('(')) {
      NodePtr n = sum();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      return make(ExprNode::Op::number, nullptr, nullptr, v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "x") return make(ExprNode::Op::x);
      if (id == "y") return make(ExprNode::Op::y);
      if (id == "eps") return make(ExprNode::Op::eps);
      if (id == "alpha") return make(ExprNode::Op::alpha);
      if (id == "pi") return make(ExprNode::Op::number, nullptr, nullptr, std::numbers::pi);
      ExprNode::Op fn;
      if (id == "cos")
        fn = ExprNode::Op::cos;
      else if (id == "sin")
        fn = ExprNode::Op::sin;
      else if (id == "exp")
        fn = ExprNode::Op::exp;
      else if (id == "sqrt")
        fn = ExprNode::Op::sqrt;
      else {
        pos_ = start;
        fail("unknown identifier '" + id + "'");
      }
      if (!accept('(')) fail("expected '(' after " + id);
      NodePtr arg = sum();
      if (!accept(')')) fail("missing ')'");
      return make(fn, arg);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

double eval(const ExprNode& n, double x, double y, double eps, double alpha) {
  using Op = ExprNode::Op;
  auto L = [&] { return eval(*n.lhs, x, y, eps, alpha); };
  auto R = [&] { return eval(*n.rhs, x, y, eps, alpha); };
  switch (n.op) {
    case Op::number: return n.value;
    case Op::x: return x;
    case Op::y: return y;
    case Op::eps: return eps;
    case Op::alpha: return alpha;
    case Op::add: return L() + R();
    case Op::sub: return L() - R();
    case Op::mul: return L() * R();
    case Op::div: return L() / R();
    case Op::pow: return std::pow(L(), R());
    case Op::neg: return -L();
    case Op::cos: return std::cos(L());
    case Op::sin: return std::sin(L());
    case Op::exp: return std::exp(L());
    case Op::sqrt: return std::sqrt(L());
  }
  return 0.0;
}

}  // namespace

Expression Expression::parse(const std::string& text) {
  Expression e;
  e.root_ = Parser(text).parse();
  e.text_ = text;
  return e;
}

double Expression::operator()(double x, double y, double eps, double alpha) const {
  if (!root_) throw InvalidArgument("empty expression");
  return eval(*root_, x, y, eps, alpha);
}

}  // namespace msfem
