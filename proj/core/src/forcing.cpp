#include "secord/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "secord/error.hpp"

namespace secord {
namespace {

ForcingTerm normalized(ForcingTerm t) {
  if (t.power < 0 || t.power > 2)
    throw Error(ErrorCode::InvalidInput, "closed-form", "ForcingSpec",
                "forcing polynomial degree must be 0, 1 or 2");
  if (t.kind != Oscillation::None && t.frequency < 0.0) {
    t.frequency = -t.frequency;
    if (t.kind == Oscillation::Sin) t.amplitude = -t.amplitude;
  }
  if (t.kind == Oscillation::Cos && t.frequency == 0.0) t.kind = Oscillation::None;
  if (t.kind == Oscillation::Sin && t.frequency == 0.0) t.amplitude = 0.0;
  if (t.kind == Oscillation::None) t.frequency = 0.0;
  return t;
}

auto key(const ForcingTerm& t) { return std::tie(t.rate, t.frequency, t.kind, t.power); }

bool is_zero(const Expr& e) { return e.is_constant() && e.constant_value() == 0.0; }

}  // namespace

ForcingSpec::ForcingSpec(std::vector<ForcingTerm> terms) {
  for (const auto& t : terms) add(t);
}

ForcingSpec ForcingSpec::constant(double c) {
  ForcingSpec f;
  f.add({c, 0, 0.0, 0.0, Oscillation::None});
  return f;
}

void ForcingSpec::add(const ForcingTerm& term) {
  const ForcingTerm t = normalized(term);
  if (t.amplitude == 0.0) return;
  auto it = std::lower_bound(terms_.begin(), terms_.end(), t,
                             [](const ForcingTerm& a, const ForcingTerm& b) {
                               return key(a) < key(b);
                             });
  if (it != terms_.end() && key(*it) == key(t)) {
    it->amplitude += t.amplitude;
    if (it->amplitude == 0.0) terms_.erase(it);
  } else {
    terms_.insert(it, t);
  }
}

Dual2 ForcingSpec::jet(const Dual2& s) const {
  Dual2 total;
  for (const auto& t : terms_) {
    const double x = s.value;
    // Jet of each factor in s, then product.
    Dual2 poly = Dual2::constant(1.0);
    for (int i = 0; i < t.power; ++i) poly = poly * s;
    const double e = std::exp(t.rate * x);
    Dual2 expo = chain(s, e, t.rate * e, t.rate * t.rate * e);
    Dual2 osc = Dual2::constant(1.0);
    const double w = t.frequency;
    if (t.kind == Oscillation::Sin) {
      osc = chain(s, std::sin(w * x), w * std::cos(w * x), -w * w * std::sin(w * x));
    } else if (t.kind == Oscillation::Cos) {
      osc = chain(s, std::cos(w * x), -w * std::sin(w * x), -w * w * std::cos(w * x));
    }
    total = total + t.amplitude * (poly * expo * osc);
  }
  return total;
}

double ForcingSpec::operator()(double s) const { return jet(Dual2::constant(s)).value; }

ForcingSpec ForcingSpec::scaled(double factor) const {
  ForcingSpec out;
  for (auto t : terms_) {
    t.amplitude *= factor;
    out.add(t);
  }
  return out;
}

Expr ForcingSpec::to_expr(std::string_view var) const {
  std::vector<Expr> parts;
  for (const auto& t : terms_)
    parts.push_back(term_expr(t.amplitude, t.power, t.rate, t.frequency, t.kind, var));
  return sum_of(parts);
}

Expr term_expr(double amplitude, int power, double rate, double frequency,
               Oscillation kind, std::string_view var) {
  if (amplitude == 0.0) return Expr(0.0);
  const Expr s = Expr::variable(std::string(var));
  std::vector<Expr> factors;
  if (power == 1) factors.push_back(s);
  if (power >= 2) factors.push_back(pow(s, Expr(static_cast<double>(power))));
  auto scaled = [&](double c) { return c == 1.0 ? s : Expr(c) * s; };
  if (rate != 0.0) factors.push_back(call(Fn::Exp, scaled(rate)));
  if (kind == Oscillation::Sin) factors.push_back(call(Fn::Sin, scaled(frequency)));
  if (kind == Oscillation::Cos) factors.push_back(call(Fn::Cos, scaled(frequency)));
  if (factors.empty()) return Expr(amplitude);
  Expr prod = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) prod = prod * factors[i];
  if (amplitude == 1.0) return prod;
  if (amplitude == -1.0) return -prod;
  return Expr(amplitude) * prod;
}

Expr sum_of(const std::vector<Expr>& parts) {
  Expr acc;
  bool first = true;
  for (const auto& p : parts) {
    if (is_zero(p)) continue;
    acc = first ? p : acc + p;
    first = false;
  }
  return acc;
}

}  // namespace secord
