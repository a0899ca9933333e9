#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cartan {

/// Forward-mode dual number carrying a full gradient, so one evaluation
/// yields every first partial derivative.
struct Dual {
  double value = 0.0;
  Eigen::VectorXd grad;

  Dual() = default;
  Dual(double v, Eigen::Index n) : value(v), grad(Eigen::VectorXd::Zero(n)) {}
  Dual(double v, Eigen::VectorXd g) : value(v), grad(std::move(g)) {}

  static Dual variable(double v, Eigen::Index n, Eigen::Index i) {
    Dual d(v, n);
    d.grad[i] = 1.0;
    return d;
  }
};

Dual operator+(const Dual& a, const Dual& b);
Dual operator-(const Dual& a, const Dual& b);
Dual operator*(const Dual& a, const Dual& b);
Dual operator/(const Dual& a, const Dual& b);
Dual operator-(const Dual& a);
Dual operator*(double s, const Dual& a);
Dual sqrt(const Dual& a);
Dual abs(const Dual& a);
Dual sin(const Dual& a);
Dual cos(const Dual& a);
Dual sinh(const Dual& a);
Dual cosh(const Dual& a);
Dual exp(const Dual& a);
Dual log(const Dual& a);
Dual pow(const Dual& a, const Dual& b);

/// Parse tree for metric entries: variables, constants, + - * / ^, unary
/// minus and the functions sin cos sinh cosh exp log sqrt. `pi` is a constant.
class ExpressionAst {
 public:
  enum class Op { Constant, Variable, Add, Sub, Mul, Div, Pow, Neg, Func };
  enum class Func { Sin, Cos, Sinh, Cosh, Exp, Log, Sqrt };

  struct Node {
    Op op = Op::Constant;
    double constant = 0.0;
    int variable = -1;
    Func func = Func::Sin;
    std::unique_ptr<Node> lhs;
    std::unique_ptr<Node> rhs;
  };

  ExpressionAst(std::string source, std::vector<std::string> variables, std::shared_ptr<const Node> root)
      : source_(std::move(source)), variables_(std::move(variables)), root_(std::move(root)) {}

  const std::string& source() const { return source_; }
  const std::vector<std::string>& variables() const { return variables_; }

  double evaluate(const Eigen::VectorXd& x) const;
  /// Value and gradient with respect to every variable.
  Dual evaluate_dual(const Eigen::VectorXd& x) const;
  /// Evaluation with caller-supplied dual inputs (chain rule through them).
  Dual evaluate_dual(const std::vector<Dual>& x) const;

 private:
  std::string source_;
  std::vector<std::string> variables_;
  std::shared_ptr<const Node> root_;
};

/// Grammar, loosest first: +,- ; *,/ ; unary - ; ^ (right associative) ;
/// primary = number | identifier | identifier '(' expr ')' | '(' expr ')'.
/// Throws ParseError (with byte offset) or UnknownSymbol.
ExpressionAst parse_expression(std::string_view source, const std::vector<std::string>& variables);

}  // namespace cartan
