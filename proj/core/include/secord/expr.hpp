#pragma once

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "secord/dual.hpp"

namespace secord {

enum class Op { Constant, Variable, Add, Sub, Mul, Div, Neg, Pow, Func };

enum class Fn { Sin, Cos, Tan, Exp, Ln, Sqrt, Asin, Acos, Atan, Sinh, Cosh, Abs };

std::string_view function_name(Fn fn);
bool lookup_function(std::string_view name, Fn& out);

/// Immutable scalar expression tree. Copies share structure; every node has
/// its arity fixed by its Op, checked at construction.
class Expr {
 public:
  struct Node;

  /// Constant zero.
  Expr();
  // Implicit on purpose: lets coefficient code write `2.0 * e`.
  Expr(double constant);  // NOLINT(google-explicit-constructor)

  static Expr constant(double v);
  static Expr variable(std::string name);
  static Expr make(Op op, std::vector<Expr> children);
  static Expr call(Fn fn, Expr argument);

  Op op() const;
  double constant_value() const;
  const std::string& name() const;
  Fn function() const;
  std::span<const Expr> children() const;

  bool is_constant() const { return op() == Op::Constant; }
  bool structurally_equal(const Expr& other) const;

  /// Sorted, de-duplicated variable names occurring in the tree.
  std::vector<std::string> variables() const;
  bool depends_on(std::string_view var) const;

  /// Replace every occurrence of variable `var` by `replacement`.
  Expr substitute(std::string_view var, const Expr& replacement) const;

  /// Canonical text in the parser grammar; reparsing gives the same tree.
  std::string to_string() const;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& base, const Expr& exponent);
Expr call(Fn fn, const Expr& argument);

/// Variable bindings. Linear lookup: contexts hold at most a handful of names.
template <class T>
class BasicEnv {
 public:
  BasicEnv() = default;
  BasicEnv(std::initializer_list<std::pair<std::string, T>> init)
      : vars_(init) {}

  void set(std::string_view name, const T& value) {
    for (auto& [n, v] : vars_) {
      if (n == name) {
        v = value;
        return;
      }
    }
    vars_.emplace_back(std::string(name), value);
  }

  const T* find(std::string_view name) const {
    for (const auto& [n, v] : vars_) {
      if (n == name) return &v;
    }
    return nullptr;
  }

  const std::vector<std::pair<std::string, T>>& entries() const { return vars_; }

 private:
  std::vector<std::pair<std::string, T>> vars_;
};

using Env = BasicEnv<double>;
using JetEnv = BasicEnv<Dual2>;

double evaluate(const Expr& e, const Env& env);
Dual2 evaluate_jet(const Expr& e, const JetEnv& env);

/// Value, first and second derivative of `e` with respect to `wrt` at `env`;
/// all other variables are held fixed.
Dual2 differentiate(const Expr& e, std::string_view wrt, const Env& env);

/// Parse text under the grammar
///   expr  := term (('+'|'-') term)*
///   term  := unary (('*'|'/') unary)*
///   unary := '-' unary | power
///   power := atom ('^' unary)?
///   atom  := number | ident | ident '(' expr ')' | '(' expr ')'
/// so that '^' binds tighter than unary minus and associates to the right.
Expr parse(std::string_view text, std::span<const std::string> variables);
Expr parse(std::string_view text, std::initializer_list<std::string_view> variables);

}  // namespace secord
