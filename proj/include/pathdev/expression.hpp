#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pathdev {

// Arithmetic expression over a fixed, ordered list of named variables.
//
// Grammar (standard precedence, left associative):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | '+' unary | atom
//   atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//
// Functions: sin cos tan asin acos atan sinh cosh tanh exp log sqrt abs (one
// argument) and pow (two). The names `pi` and `e` are constants unless they
// are declared as variables.
//
// Expressions are immutable; copies share the tree.
class Expression {
 public:
  struct Node;

  Expression();

  static Expression parse(std::string_view source, std::vector<std::string> variables);
  /// Variables x1..xn.
  static Expression parse_coordinates(std::string_view source, int dim);
  static Expression constant(double value, std::vector<std::string> variables = {});

  double evaluate(std::span<const double> values) const;
  double operator()(std::span<const double> values) const { return evaluate(values); }

  /// Symbolic partial derivative with respect to variable `index`.
  Expression derivative(std::size_t index) const;

  /// Fully parenthesised text that parses back to an equivalent tree.
  std::string to_string() const;

  bool is_constant() const;
  const std::vector<std::string>& variables() const { return *variables_; }

  /// Builds from an already-constructed node; used by the generators in tests.
  Expression(std::shared_ptr<const Node> root, std::shared_ptr<const std::vector<std::string>> vars);
  const std::shared_ptr<const Node>& root() const { return root_; }

 private:
  std::shared_ptr<const Node> root_;
  std::shared_ptr<const std::vector<std::string>> variables_;
};

enum class NodeOp { Number, Variable, Negate, Add, Sub, Mul, Div, Call };

enum class Function { Sin, Cos, Tan, Asin, Acos, Atan, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Abs, Pow };

struct Expression::Node {
  NodeOp op = NodeOp::Number;
  double value = 0.0;
  std::size_t variable = 0;
  Function function = Function::Sin;
  std::vector<std::shared_ptr<const Node>> args;
};

/// Names accepted by the parser, for diagnostics.
std::vector<std::string> expression_function_names();

}  // namespace pathdev
