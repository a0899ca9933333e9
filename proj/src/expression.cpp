#include "cartan/expression.hpp"

#include <cctype>
#include <cmath>
#include <charconv>
#include <numbers>

#include "cartan/error.hpp"

namespace cartan {

Dual operator+(const Dual& a, const Dual& b) { return {a.value + b.value, a.grad + b.grad}; }
Dual operator-(const Dual& a, const Dual& b) { return {a.value - b.value, a.grad - b.grad}; }
Dual operator*(const Dual& a, const Dual& b) { return {a.value * b.value, b.value * a.grad + a.value * b.grad}; }
Dual operator/(const Dual& a, const Dual& b) {
  const double q = a.value / b.value;
  return {q, (a.grad - q * b.grad) / b.value};
}
Dual operator-(const Dual& a) { return {-a.value, -a.grad}; }
Dual operator*(double s, const Dual& a) { return {s * a.value, s * a.grad}; }
Dual sqrt(const Dual& a) {
  const double r = std::sqrt(a.value);
  return {r, a.grad / (2.0 * r)};
}
Dual abs(const Dual& a) { return a.value < 0.0 ? -a : a; }
Dual sin(const Dual& a) { return {std::sin(a.value), std::cos(a.value) * a.grad}; }
Dual cos(const Dual& a) { return {std::cos(a.value), -std::sin(a.value) * a.grad}; }
Dual sinh(const Dual& a) { return {std::sinh(a.value), std::cosh(a.value) * a.grad}; }
Dual cosh(const Dual& a) { return {std::cosh(a.value), std::sinh(a.value) * a.grad}; }
Dual exp(const Dual& a) {
  const double e = std::exp(a.value);
  return {e, e * a.grad};
}
Dual log(const Dual& a) { return {std::log(a.value), a.grad / a.value}; }
Dual pow(const Dual& a, const Dual& b) {
  const double v = std::pow(a.value, b.value);
  if (b.grad.isZero(0.0)) {
    // Constant exponent: valid for negative bases with integer exponents.
    const double dv = b.value == 0.0 ? 0.0 : b.value * std::pow(a.value, b.value - 1.0);
    return {v, dv * a.grad};
  }
  return {v, v * (std::log(a.value) * b.grad + b.value / a.value * a.grad)};
}

namespace {

using Node = ExpressionAst::Node;
using NodePtr = std::unique_ptr<Node>;

NodePtr make(ExpressionAst::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_unique<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    NodePtr root = additive();
    skip_space();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::ParseError, what + " at offset " + std::to_string(pos_), static_cast<long>(pos_));
  }

  void skip_space() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr additive() {
    NodePtr lhs = multiplicative();
    for (;;) {
      if (accept('+')) lhs = make(ExpressionAst::Op::Add, std::move(lhs), multiplicative());
      else if (accept('-')) lhs = make(ExpressionAst::Op::Sub, std::move(lhs), multiplicative());
      else return lhs;
    }
  }

  NodePtr multiplicative() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(ExpressionAst::Op::Mul, std::move(lhs), unary());
      else if (accept('/')) lhs = make(ExpressionAst::Op::Div, std::move(lhs), unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(ExpressionAst::Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(ExpressionAst::Op::Pow, std::move(base), unary_in_exponent());
    return base;
  }

  // "2^-1" is accepted; the exponent binds tighter than any binary operator.
  NodePtr unary_in_exponent() {
    if (accept('-')) return make(ExpressionAst::Op::Neg, unary_in_exponent());
    return power();
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = additive();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && std::isdigit(static_cast<unsigned char>(src_[look]))) {
        pos_ = look;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      }
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, value);
    if (ec != std::errc() || ptr != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    auto n = make(ExpressionAst::Op::Constant);
    n->constant = value;
    return n;
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    skip_space();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      static const std::pair<const char*, ExpressionAst::Func> funcs[] = {
          {"sin", ExpressionAst::Func::Sin},   {"cos", ExpressionAst::Func::Cos}, {"sinh", ExpressionAst::Func::Sinh},
          {"cosh", ExpressionAst::Func::Cosh}, {"exp", ExpressionAst::Func::Exp}, {"log", ExpressionAst::Func::Log},
          {"sqrt", ExpressionAst::Func::Sqrt},
      };
      for (const auto& [fname, f] : funcs) {
        if (name == fname) {
          ++pos_;
          NodePtr arg = additive();
          if (!accept(')')) fail("expected ')'");
          auto n = make(ExpressionAst::Op::Func, std::move(arg));
          n->func = f;
          return n;
        }
      }
      throw Error(ErrorKind::UnknownSymbol, "unknown function '" + name + "'", static_cast<long>(start));
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == name) {
        auto n = make(ExpressionAst::Op::Variable);
        n->variable = static_cast<int>(i);
        return n;
      }
    }
    if (name == "pi") {
      auto n = make(ExpressionAst::Op::Constant);
      n->constant = std::numbers::pi;
      return n;
    }
    throw Error(ErrorKind::UnknownSymbol, "unknown identifier '" + name + "'", static_cast<long>(start));
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

template <class T, class Leaf>
T eval(const Node& n, const Leaf& leaf) {
  using Op = ExpressionAst::Op;
  using std::cos, std::cosh, std::exp, std::log, std::pow, std::sin, std::sinh, std::sqrt;
  switch (n.op) {
    case Op::Constant:
    case Op::Variable:
      return leaf(n);
    case Op::Add: return eval<T>(*n.lhs, leaf) + eval<T>(*n.rhs, leaf);
    case Op::Sub: return eval<T>(*n.lhs, leaf) - eval<T>(*n.rhs, leaf);
    case Op::Mul: return eval<T>(*n.lhs, leaf) * eval<T>(*n.rhs, leaf);
    case Op::Div: return eval<T>(*n.lhs, leaf) / eval<T>(*n.rhs, leaf);
    case Op::Pow: return pow(eval<T>(*n.lhs, leaf), eval<T>(*n.rhs, leaf));
    case Op::Neg: return -eval<T>(*n.lhs, leaf);
    case Op::Func: {
      const T a = eval<T>(*n.lhs, leaf);
      switch (n.func) {
        case ExpressionAst::Func::Sin: return sin(a);
        case ExpressionAst::Func::Cos: return cos(a);
        case ExpressionAst::Func::Sinh: return sinh(a);
        case ExpressionAst::Func::Cosh: return cosh(a);
        case ExpressionAst::Func::Exp: return exp(a);
        case ExpressionAst::Func::Log: return log(a);
        case ExpressionAst::Func::Sqrt: return sqrt(a);
      }
    }
  }
  return leaf(n);
}

}  // namespace

double ExpressionAst::evaluate(const Eigen::VectorXd& x) const {
  if (x.size() != static_cast<Eigen::Index>(variables_.size()))
    throw Error(ErrorKind::InvalidDimension, "expression '" + source_ + "' evaluated at a point of the wrong dimension");
  return eval<double>(*root_, [&](const Node& n) { return n.op == Op::Variable ? x[n.variable] : n.constant; });
}

Dual ExpressionAst::evaluate_dual(const Eigen::VectorXd& x) const {
  const Eigen::Index d = x.size();
  std::vector<Dual> vars;
  vars.reserve(d);
  for (Eigen::Index i = 0; i < d; ++i) vars.push_back(Dual::variable(x[i], d, i));
  return evaluate_dual(vars);
}

Dual ExpressionAst::evaluate_dual(const std::vector<Dual>& x) const {
  if (x.size() != variables_.size())
    throw Error(ErrorKind::InvalidDimension, "expression '" + source_ + "' evaluated at a point of the wrong dimension");
  const Eigen::Index n = x.empty() ? 0 : x.front().grad.size();
  return eval<Dual>(*root_, [&](const Node& node) {
    return node.op == Op::Variable ? x[node.variable] : Dual(node.constant, n);
  });
}

ExpressionAst parse_expression(std::string_view source, const std::vector<std::string>& variables) {
  Parser parser(source, variables);
  std::shared_ptr<const Node> root = parser.parse();
  return ExpressionAst(std::string(source), variables, std::move(root));
}

}  // namespace cartan
