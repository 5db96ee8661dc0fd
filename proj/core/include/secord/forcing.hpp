#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "secord/expr.hpp"

namespace secord {

enum class Oscillation { None, Sin, Cos };

/// amplitude * s^power * exp(rate*s) * {1 | sin(frequency*s) | cos(frequency*s)}
struct ForcingTerm {
  double amplitude = 0.0;
  int power = 0;  // 0, 1 or 2
  double rate = 0.0;
  double frequency = 0.0;
  Oscillation kind = Oscillation::None;
};

/// Finite sum of ForcingTerms kept in canonical order with like terms merged.
class ForcingSpec {
 public:
  ForcingSpec() = default;
  explicit ForcingSpec(std::vector<ForcingTerm> terms);

  static ForcingSpec constant(double c);

  void add(const ForcingTerm& term);
  std::span<const ForcingTerm> terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  double operator()(double s) const;
  Dual2 jet(const Dual2& s) const;
  ForcingSpec scaled(double factor) const;
  Expr to_expr(std::string_view var) const;

 private:
  std::vector<ForcingTerm> terms_;
};

/// Builds amplitude * var^power * exp(rate*var) * osc(frequency*var) with
/// unit factors omitted.
Expr term_expr(double amplitude, int power, double rate, double frequency,
               Oscillation kind, std::string_view var);

/// Sum of expressions, skipping exact zeros; empty sum is the constant 0.
Expr sum_of(const std::vector<Expr>& parts);

}  // namespace secord
