#include "pathdev/expression.hpp"

#include "pathdev/types.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace pathdev {

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

struct FunctionInfo {
  const char* name;
  Function fn;
  int arity;
};

constexpr std::array<FunctionInfo, 14> kFunctions{{
    {"sin", Function::Sin, 1},   {"cos", Function::Cos, 1},   {"tan", Function::Tan, 1},
    {"asin", Function::Asin, 1}, {"acos", Function::Acos, 1}, {"atan", Function::Atan, 1},
    {"sinh", Function::Sinh, 1}, {"cosh", Function::Cosh, 1}, {"tanh", Function::Tanh, 1},
    {"exp", Function::Exp, 1},   {"log", Function::Log, 1},   {"sqrt", Function::Sqrt, 1},
    {"abs", Function::Abs, 1},   {"pow", Function::Pow, 2},
}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (name == f.name) return &f;
  return nullptr;
}

const char* function_name(Function fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f.name;
  return "?";
}

NodePtr number(double v) {
  auto n = std::make_shared<Expression::Node>();
  n->op = NodeOp::Number;
  n->value = v;
  return n;
}

NodePtr variable(std::size_t i) {
  auto n = std::make_shared<Expression::Node>();
  n->op = NodeOp::Variable;
  n->variable = i;
  return n;
}

bool is_number(const NodePtr& n, double v) { return n->op == NodeOp::Number && n->value == v; }

// Constructors with light constant folding so derivative trees stay small.
NodePtr negate(NodePtr a) {
  if (a->op == NodeOp::Number) return number(-a->value);
  if (a->op == NodeOp::Negate) return a->args[0];
  auto n = std::make_shared<Expression::Node>();
  n->op = NodeOp::Negate;
  n->args = {std::move(a)};
  return n;
}

NodePtr binary(NodeOp op, NodePtr a, NodePtr b) {
  if (a->op == NodeOp::Number && b->op == NodeOp::Number) {
    switch (op) {
      case NodeOp::Add: return number(a->value + b->value);
      case NodeOp::Sub: return number(a->value - b->value);
      case NodeOp::Mul: return number(a->value * b->value);
      case NodeOp::Div:
        if (b->value != 0.0) return number(a->value / b->value);
        break;
      default: break;
    }
  }
  switch (op) {
    case NodeOp::Add:
      if (is_number(a, 0.0)) return b;
      if (is_number(b, 0.0)) return a;
      break;
    case NodeOp::Sub:
      if (is_number(b, 0.0)) return a;
      if (is_number(a, 0.0)) return negate(b);
      break;
    case NodeOp::Mul:
      if (is_number(a, 0.0) || is_number(b, 0.0)) return number(0.0);
      if (is_number(a, 1.0)) return b;
      if (is_number(b, 1.0)) return a;
      if (is_number(a, -1.0)) return negate(b);
      if (is_number(b, -1.0)) return negate(a);
      break;
    case NodeOp::Div:
      if (is_number(a, 0.0)) return number(0.0);
      if (is_number(b, 1.0)) return a;
      break;
    default: break;
  }
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->args = {std::move(a), std::move(b)};
  return n;
}

NodePtr call(Function fn, std::vector<NodePtr> args) {
  auto n = std::make_shared<Expression::Node>();
  n->op = NodeOp::Call;
  n->function = fn;
  n->args = std::move(args);
  return n;
}

NodePtr add(NodePtr a, NodePtr b) { return binary(NodeOp::Add, std::move(a), std::move(b)); }
NodePtr sub(NodePtr a, NodePtr b) { return binary(NodeOp::Sub, std::move(a), std::move(b)); }
NodePtr mul(NodePtr a, NodePtr b) { return binary(NodeOp::Mul, std::move(a), std::move(b)); }
NodePtr div(NodePtr a, NodePtr b) { return binary(NodeOp::Div, std::move(a), std::move(b)); }

double apply(Function fn, double a, double b) {
  switch (fn) {
    case Function::Sin: return std::sin(a);
    case Function::Cos: return std::cos(a);
    case Function::Tan: return std::tan(a);
    case Function::Asin: return std::asin(a);
    case Function::Acos: return std::acos(a);
    case Function::Atan: return std::atan(a);
    case Function::Sinh: return std::sinh(a);
    case Function::Cosh: return std::cosh(a);
    case Function::Tanh: return std::tanh(a);
    case Function::Exp: return std::exp(a);
    case Function::Log: return std::log(a);
    case Function::Sqrt: return std::sqrt(a);
    case Function::Abs: return std::abs(a);
    case Function::Pow: return std::pow(a, b);
  }
  return 0.0;
}

double eval(const Expression::Node& n, std::span<const double> x) {
  switch (n.op) {
    case NodeOp::Number: return n.value;
    case NodeOp::Variable: return x[n.variable];
    case NodeOp::Negate: return -eval(*n.args[0], x);
    case NodeOp::Add: return eval(*n.args[0], x) + eval(*n.args[1], x);
    case NodeOp::Sub: return eval(*n.args[0], x) - eval(*n.args[1], x);
    case NodeOp::Mul: return eval(*n.args[0], x) * eval(*n.args[1], x);
    case NodeOp::Div: return eval(*n.args[0], x) / eval(*n.args[1], x);
    case NodeOp::Call:
      return apply(n.function, eval(*n.args[0], x), n.args.size() > 1 ? eval(*n.args[1], x) : 0.0);
  }
  return 0.0;
}

NodePtr diff(const NodePtr& n, std::size_t v) {
  switch (n->op) {
    case NodeOp::Number: return number(0.0);
    case NodeOp::Variable: return number(n->variable == v ? 1.0 : 0.0);
    case NodeOp::Negate: return negate(diff(n->args[0], v));
    case NodeOp::Add: return add(diff(n->args[0], v), diff(n->args[1], v));
    case NodeOp::Sub: return sub(diff(n->args[0], v), diff(n->args[1], v));
    case NodeOp::Mul: {
      const auto& a = n->args[0];
      const auto& b = n->args[1];
      return add(mul(diff(a, v), b), mul(a, diff(b, v)));
    }
    case NodeOp::Div: {
      const auto& a = n->args[0];
      const auto& b = n->args[1];
      return div(sub(mul(diff(a, v), b), mul(a, diff(b, v))), mul(b, b));
    }
    case NodeOp::Call: break;
  }
  const auto& a = n->args[0];
  NodePtr da = diff(a, v);
  if (is_number(da, 0.0) && n->function != Function::Pow) return number(0.0);
  switch (n->function) {
    case Function::Sin: return mul(da, call(Function::Cos, {a}));
    case Function::Cos: return negate(mul(da, call(Function::Sin, {a})));
    case Function::Tan: {
      NodePtr c = call(Function::Cos, {a});
      return div(da, mul(c, c));
    }
    case Function::Asin: return div(da, call(Function::Sqrt, {sub(number(1.0), mul(a, a))}));
    case Function::Acos: return negate(div(da, call(Function::Sqrt, {sub(number(1.0), mul(a, a))})));
    case Function::Atan: return div(da, add(number(1.0), mul(a, a)));
    case Function::Sinh: return mul(da, call(Function::Cosh, {a}));
    case Function::Cosh: return mul(da, call(Function::Sinh, {a}));
    case Function::Tanh: {
      NodePtr c = call(Function::Cosh, {a});
      return div(da, mul(c, c));
    }
    case Function::Exp: return mul(da, n);
    case Function::Log: return div(da, a);
    case Function::Sqrt: return div(da, mul(number(2.0), n));
    case Function::Abs: return mul(da, div(a, n));
    case Function::Pow: {
      const auto& b = n->args[1];
      NodePtr db = diff(b, v);
      if (b->op == NodeOp::Number) {
        if (is_number(da, 0.0)) return number(0.0);
        return mul(mul(number(b->value), call(Function::Pow, {a, number(b->value - 1.0)})), da);
      }
      // d(a^b) = a^b * (b' log a + b a'/a)
      return mul(n, add(mul(db, call(Function::Log, {a})), div(mul(b, da), a)));
    }
  }
  return number(0.0);
}

void print(const Expression::Node& n, const std::vector<std::string>& vars, std::string& out) {
  switch (n.op) {
    case NodeOp::Number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", std::abs(n.value));
      if (std::signbit(n.value)) {
        out += "(-";
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case NodeOp::Variable: out += vars[n.variable]; return;
    case NodeOp::Negate:
      out += "(-";
      print(*n.args[0], vars, out);
      out += ")";
      return;
    case NodeOp::Add:
    case NodeOp::Sub:
    case NodeOp::Mul:
    case NodeOp::Div: {
      const char op = n.op == NodeOp::Add ? '+' : n.op == NodeOp::Sub ? '-' : n.op == NodeOp::Mul ? '*' : '/';
      out += "(";
      print(*n.args[0], vars, out);
      out += ' ';
      out += op;
      out += ' ';
      print(*n.args[1], vars, out);
      out += ")";
      return;
    }
    case NodeOp::Call:
      out += function_name(n.function);
      out += "(";
      for (std::size_t i = 0; i < n.args.size(); ++i) {
        if (i) out += ", ";
        print(*n.args[i], vars, out);
      }
      out += ")";
      return;
  }
}

class Parser {
 public:
  Parser(std::string_view src, const std::vector<std::string>& vars) : src_(src), vars_(vars) {}

  NodePtr parse() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    NodePtr e = expr();
    skip();
    if (pos_ != src_.size()) throw ParseError(std::string("unexpected character '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = raw(NodeOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = raw(NodeOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = raw(NodeOp::Mul, lhs, unary());
      } else if (accept('/')) {
        lhs = raw(NodeOp::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Expression::Node>();
      n->op = NodeOp::Negate;
      n->args = {unary()};
      return n;
    }
    if (accept('+')) return unary();
    return atom();
  }

  // Parsed trees are kept verbatim (no folding) so printing is faithful.
  static NodePtr raw(NodeOp op, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Expression::Node>();
    n->op = op;
    n->args = {std::move(a), std::move(b)};
    return n;
  }

  NodePtr atom() {
    skip();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr literal() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + pos_, src_.data() + src_.size(), v);
    if (ec != std::errc()) throw ParseError("malformed number", start);
    pos_ = static_cast<std::size_t>(ptr - src_.data());
    return number(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    const std::string name(src_.substr(start, pos_ - start));
    skip();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      const FunctionInfo* f = find_function(name);
      if (!f) throw ParseError("unknown function '" + name + "'", start);
      ++pos_;
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      if (!accept(')')) throw ParseError("expected ')' after arguments of '" + name + "'", pos_);
      if (static_cast<int>(args.size()) != f->arity)
        throw ParseError("function '" + name + "' expects " + std::to_string(f->arity) + " argument(s), got " +
                             std::to_string(args.size()),
                         start);
      return call(f->fn, std::move(args));
    }
    for (std::size_t i = 0; i < vars_.size(); ++i)
      if (vars_[i] == name) return variable(i);
    if (name == "pi") return number(std::numbers::pi);
    if (name == "e") return number(std::numbers::e);
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view src_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression()
    : root_(number(0.0)), variables_(std::make_shared<const std::vector<std::string>>()) {}

Expression::Expression(std::shared_ptr<const Node> root, std::shared_ptr<const std::vector<std::string>> vars)
    : root_(std::move(root)), variables_(std::move(vars)) {}

Expression Expression::parse(std::string_view source, std::vector<std::string> variables) {
  auto vars = std::make_shared<const std::vector<std::string>>(std::move(variables));
  Parser p(source, *vars);
  return Expression(p.parse(), vars);
}

Expression Expression::parse_coordinates(std::string_view source, int dim) {
  std::vector<std::string> names;
  for (int i = 1; i <= dim; ++i) names.push_back("x" + std::to_string(i));
  return parse(source, std::move(names));
}

Expression Expression::constant(double value, std::vector<std::string> variables) {
  return Expression(number(value), std::make_shared<const std::vector<std::string>>(std::move(variables)));
}

double Expression::evaluate(std::span<const double> values) const {
  if (values.size() < variables_->size())
    throw Error(ErrorKind::Argument, "expression: expected " + std::to_string(variables_->size()) + " values, got " +
                                         std::to_string(values.size()));
  return eval(*root_, values);
}

Expression Expression::derivative(std::size_t index) const {
  if (index >= variables_->size()) throw Error(ErrorKind::Argument, "expression: derivative index out of range");
  return Expression(diff(root_, index), variables_);
}

std::string Expression::to_string() const {
  std::string out;
  print(*root_, *variables_, out);
  return out;
}

bool Expression::is_constant() const { return root_->op == NodeOp::Number; }

std::vector<std::string> expression_function_names() {
  std::vector<std::string> names;
  for (const auto& f : kFunctions) names.emplace_back(f.name);
  return names;
}

}  // namespace pathdev
