#include "secord/expr.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>

#include "secord/error.hpp"

namespace secord {

struct Expr::Node {
  Op op = Op::Constant;
  Fn fn = Fn::Sin;
  double value = 0.0;
  std::string name;
  std::vector<Expr> kids;
};

namespace {

constexpr std::array<std::pair<Fn, std::string_view>, 12> kFunctions{{
    {Fn::Sin, "sin"},
    {Fn::Cos, "cos"},
    {Fn::Tan, "tan"},
    {Fn::Exp, "exp"},
    {Fn::Ln, "ln"},
    {Fn::Sqrt, "sqrt"},
    {Fn::Asin, "asin"},
    {Fn::Acos, "acos"},
    {Fn::Atan, "atan"},
    {Fn::Sinh, "sinh"},
    {Fn::Cosh, "cosh"},
    {Fn::Abs, "abs"},
}};

std::size_t arity(Op op) {
  switch (op) {
    case Op::Constant:
    case Op::Variable:
      return 0;
    case Op::Neg:
    case Op::Func:
      return 1;
    default:
      return 2;
  }
}

[[noreturn]] void eval_error(ErrorCode code, const std::string& msg, double arg) {
  throw Error(code, "expr-core", "evaluate", msg, {arg});
}

// ---- scalar primitives shared by the double and Dual2 evaluators ----

double value_of(double v) { return v; }
double value_of(const Dual2& v) { return v.value; }

bool is_integral(double v) {
  return std::isfinite(v) && std::abs(v) < 1e9 && v == std::nearbyint(v);
}

double apply_fn(Fn fn, double u) {
  switch (fn) {
    case Fn::Sin: return std::sin(u);
    case Fn::Cos: return std::cos(u);
    case Fn::Tan: return std::tan(u);
    case Fn::Exp: return std::exp(u);
    case Fn::Ln: return std::log(u);
    case Fn::Sqrt: return std::sqrt(u);
    case Fn::Asin: return std::asin(u);
    case Fn::Acos: return std::acos(u);
    case Fn::Atan: return std::atan(u);
    case Fn::Sinh: return std::sinh(u);
    case Fn::Cosh: return std::cosh(u);
    case Fn::Abs: return std::abs(u);
  }
  return 0.0;
}

Dual2 apply_fn(Fn fn, const Dual2& u) {
  const double x = u.value;
  switch (fn) {
    case Fn::Sin: {
      const double s = std::sin(x), c = std::cos(x);
      return chain(u, s, c, -s);
    }
    case Fn::Cos: {
      const double s = std::sin(x), c = std::cos(x);
      return chain(u, c, -s, -c);
    }
    case Fn::Tan: {
      const double t = std::tan(x), sec2 = 1.0 + t * t;
      return chain(u, t, sec2, 2.0 * t * sec2);
    }
    case Fn::Exp: {
      const double e = std::exp(x);
      return chain(u, e, e, e);
    }
    case Fn::Ln:
      return chain(u, std::log(x), 1.0 / x, -1.0 / (x * x));
    case Fn::Sqrt: {
      const double s = std::sqrt(x);
      return chain(u, s, 0.5 / s, -0.25 / (s * x));
    }
    case Fn::Asin: {
      const double r = 1.0 - x * x, q = 1.0 / std::sqrt(r);
      return chain(u, std::asin(x), q, x * q / r);
    }
    case Fn::Acos: {
      const double r = 1.0 - x * x, q = 1.0 / std::sqrt(r);
      return chain(u, std::acos(x), -q, -x * q / r);
    }
    case Fn::Atan: {
      const double r = 1.0 + x * x;
      return chain(u, std::atan(x), 1.0 / r, -2.0 * x / (r * r));
    }
    case Fn::Sinh:
      return chain(u, std::sinh(x), std::cosh(x), std::sinh(x));
    case Fn::Cosh:
      return chain(u, std::cosh(x), std::sinh(x), std::cosh(x));
    case Fn::Abs:
      return chain(u, std::abs(x), x < 0.0 ? -1.0 : 1.0, 0.0);
  }
  return {};
}

void check_domain(Fn fn, double x) {
  switch (fn) {
    case Fn::Ln:
      if (!(x > 0.0)) eval_error(ErrorCode::DomainError, "ln of non-positive argument", x);
      break;
    case Fn::Sqrt:
      if (!(x >= 0.0)) eval_error(ErrorCode::DomainError, "sqrt of negative argument", x);
      break;
    case Fn::Asin:
    case Fn::Acos:
      if (!(x >= -1.0 && x <= 1.0))
        eval_error(ErrorCode::DomainError,
                   std::string(function_name(fn)) + " argument outside [-1,1]", x);
      break;
    default:
      if (std::isnan(x)) eval_error(ErrorCode::DomainError, "NaN argument", x);
      break;
  }
}

double div_checked(double a, double b) {
  if (b == 0.0) eval_error(ErrorCode::DivisionByZero, "division by zero", a);
  return a / b;
}
Dual2 div_checked(const Dual2& a, const Dual2& b) {
  if (b.value == 0.0) eval_error(ErrorCode::DivisionByZero, "division by zero", a.value);
  return a / b;
}

double pow_checked(double a, double b) {
  if (is_integral(b)) {
    if (a == 0.0 && b < 0.0)
      eval_error(ErrorCode::DivisionByZero, "zero raised to a negative power", a);
    return std::pow(a, b);
  }
  if (!(a > 0.0))
    eval_error(ErrorCode::DomainError, "non-integer power of non-positive base", a);
  return std::pow(a, b);
}

Dual2 pow_checked(const Dual2& a, const Dual2& b) {
  const bool constant_exponent = b.d1 == 0.0 && b.d2 == 0.0;
  if (constant_exponent && is_integral(b.value)) {
    const double n = b.value;
    if (a.value == 0.0 && n < 0.0)
      eval_error(ErrorCode::DivisionByZero, "zero raised to a negative power", a.value);
    if (n == 0.0) return Dual2::constant(1.0);
    const double g0 = std::pow(a.value, n);
    const double g1 = n * std::pow(a.value, n - 1.0);
    const double g2 = (n == 1.0) ? 0.0 : n * (n - 1.0) * std::pow(a.value, n - 2.0);
    return chain(a, g0, g1, g2);
  }
  if (!(a.value > 0.0))
    eval_error(ErrorCode::DomainError, "non-integer power of non-positive base", a.value);
  // a^b = exp(b ln a)
  const Dual2 lna = chain(a, std::log(a.value), 1.0 / a.value, -1.0 / (a.value * a.value));
  const Dual2 g = b * lna;
  const double v = std::pow(a.value, b.value);
  return {v, v * g.d1, v * (g.d2 + g.d1 * g.d1)};
}

template <class T>
T lift(double c);
template <>
double lift<double>(double c) { return c; }
template <>
Dual2 lift<Dual2>(double c) { return Dual2::constant(c); }

template <class T>
T eval_node(const Expr& e, const BasicEnv<T>& env) {
  const auto kids = e.children();
  switch (e.op()) {
    case Op::Constant:
      return lift<T>(e.constant_value());
    case Op::Variable: {
      const T* v = env.find(e.name());
      if (v == nullptr)
        throw Error(ErrorCode::UnknownIdentifier, "expr-core", "evaluate",
                    "unbound variable '" + e.name() + "'");
      return *v;
    }
    case Op::Add:
      return eval_node(kids[0], env) + eval_node(kids[1], env);
    case Op::Sub:
      return eval_node(kids[0], env) - eval_node(kids[1], env);
    case Op::Mul:
      return eval_node(kids[0], env) * eval_node(kids[1], env);
    case Op::Div:
      return div_checked(eval_node(kids[0], env), eval_node(kids[1], env));
    case Op::Neg:
      return -eval_node(kids[0], env);
    case Op::Pow:
      return pow_checked(eval_node(kids[0], env), eval_node(kids[1], env));
    case Op::Func: {
      const T u = eval_node(kids[0], env);
      check_domain(e.function(), value_of(u));
      return apply_fn(e.function(), u);
    }
  }
  return lift<T>(0.0);
}

// ---- printing ----

int precedence(const Expr& e) {
  switch (e.op()) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    case Op::Constant:
      return e.constant_value() < 0.0 || std::signbit(e.constant_value()) ? 0 : 5;
    default:
      return 5;
  }
}

void format_number(std::string& out, double v) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

void print(const Expr& e, std::string& out);

void print_child(const Expr& child, bool parens, std::string& out) {
  if (parens) out += '(';
  print(child, out);
  if (parens) out += ')';
}

void print(const Expr& e, std::string& out) {
  const auto kids = e.children();
  switch (e.op()) {
    case Op::Constant:
      format_number(out, e.constant_value());
      return;
    case Op::Variable:
      out += e.name();
      return;
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div: {
      const int p = precedence(e);
      // a leading negative literal reads back the same without parentheses
      const bool neg_literal = kids[0].op() == Op::Constant && precedence(kids[0]) == 0;
      print_child(kids[0], precedence(kids[0]) < p && !neg_literal, out);
      switch (e.op()) {
        case Op::Add: out += " + "; break;
        case Op::Sub: out += " - "; break;
        case Op::Mul: out += '*'; break;
        default: out += '/'; break;
      }
      print_child(kids[1], precedence(kids[1]) <= p, out);
      return;
    }
    case Op::Neg:
      out += '-';
      print_child(kids[0], precedence(kids[0]) < 3, out);
      return;
    case Op::Pow:
      print_child(kids[0], precedence(kids[0]) < 5, out);
      out += '^';
      print_child(kids[1], precedence(kids[1]) < 3, out);
      return;
    case Op::Func:
      out += function_name(e.function());
      out += '(';
      print(kids[0], out);
      out += ')';
      return;
  }
}

void collect_variables(const Expr& e, std::vector<std::string>& out) {
  if (e.op() == Op::Variable) {
    out.push_back(e.name());
    return;
  }
  for (const auto& k : e.children()) collect_variables(k, out);
}

}  // namespace

std::string_view function_name(Fn fn) {
  for (const auto& [f, n] : kFunctions) {
    if (f == fn) return n;
  }
  return "?";
}

bool lookup_function(std::string_view name, Fn& out) {
  for (const auto& [f, n] : kFunctions) {
    if (n == name) {
      out = f;
      return true;
    }
  }
  return false;
}

Expr::Expr() : Expr(0.0) {}

Expr::Expr(double constant) {
  auto n = std::make_shared<Node>();
  n->op = Op::Constant;
  n->value = constant;
  node_ = std::move(n);
}

Expr Expr::constant(double v) { return Expr(v); }

Expr Expr::variable(std::string name) {
  auto n = std::make_shared<Node>();
  n->op = Op::Variable;
  n->name = std::move(name);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::make(Op op, std::vector<Expr> children) {
  if (op == Op::Constant || op == Op::Variable || op == Op::Func)
    throw Error(ErrorCode::ArityError, "expr-core", "construct",
                "use constant(), variable() or call() for leaf and function nodes");
  if (children.size() != arity(op))
    throw Error(ErrorCode::ArityError, "expr-core", "construct",
                "wrong number of operands");
  auto n = std::make_shared<Node>();
  n->op = op;
  n->kids = std::move(children);
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Expr Expr::call(Fn fn, Expr argument) {
  auto n = std::make_shared<Node>();
  n->op = Op::Func;
  n->fn = fn;
  n->kids.push_back(std::move(argument));
  return Expr(std::shared_ptr<const Node>(std::move(n)));
}

Op Expr::op() const { return node_->op; }
double Expr::constant_value() const { return node_->value; }
const std::string& Expr::name() const { return node_->name; }
Fn Expr::function() const { return node_->fn; }
std::span<const Expr> Expr::children() const { return node_->kids; }

bool Expr::structurally_equal(const Expr& other) const {
  if (node_ == other.node_) return true;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.op != b.op || a.kids.size() != b.kids.size()) return false;
  switch (a.op) {
    case Op::Constant:
      if (a.value != b.value) return false;
      break;
    case Op::Variable:
      if (a.name != b.name) return false;
      break;
    case Op::Func:
      if (a.fn != b.fn) return false;
      break;
    default:
      break;
  }
  for (std::size_t i = 0; i < a.kids.size(); ++i) {
    if (!a.kids[i].structurally_equal(b.kids[i])) return false;
  }
  return true;
}

std::vector<std::string> Expr::variables() const {
  std::vector<std::string> out;
  collect_variables(*this, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

bool Expr::depends_on(std::string_view var) const {
  if (op() == Op::Variable) return name() == var;
  return std::any_of(children().begin(), children().end(),
                     [&](const Expr& k) { return k.depends_on(var); });
}

Expr Expr::substitute(std::string_view var, const Expr& replacement) const {
  switch (op()) {
    case Op::Constant:
      return *this;
    case Op::Variable:
      return name() == var ? replacement : *this;
    case Op::Func:
      return Expr::call(function(), children()[0].substitute(var, replacement));
    default: {
      std::vector<Expr> kids;
      kids.reserve(children().size());
      for (const auto& k : children()) kids.push_back(k.substitute(var, replacement));
      return Expr::make(op(), std::move(kids));
    }
  }
}

std::string Expr::to_string() const {
  std::string out;
  print(*this, out);
  return out;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::make(Op::Add, {a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::make(Op::Sub, {a, b}); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::make(Op::Mul, {a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::make(Op::Div, {a, b}); }
Expr operator-(const Expr& a) {
  if (a.is_constant()) return Expr(-a.constant_value());
  return Expr::make(Op::Neg, {a});
}
Expr pow(const Expr& base, const Expr& exponent) {
  return Expr::make(Op::Pow, {base, exponent});
}
Expr call(Fn fn, const Expr& argument) { return Expr::call(fn, argument); }

double evaluate(const Expr& e, const Env& env) { return eval_node<double>(e, env); }

Dual2 evaluate_jet(const Expr& e, const JetEnv& env) { return eval_node<Dual2>(e, env); }

Dual2 differentiate(const Expr& e, std::string_view wrt, const Env& env) {
  JetEnv jets;
  for (const auto& [name, v] : env.entries()) {
    jets.set(name, name == wrt ? Dual2::seed(v) : Dual2::constant(v));
  }
  if (env.find(wrt) == nullptr)
    throw Error(ErrorCode::UnknownIdentifier, "expr-core", "differentiate",
                "differentiation variable '" + std::string(wrt) + "' is not bound");
  return evaluate_jet(e, jets);
}

}  // namespace secord
