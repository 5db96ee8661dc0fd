#pragma once

#include <cmath>

namespace secord {

/// Second-order forward-mode jet: a value together with its first and
/// second derivative along one seed direction.
struct Dual2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;

  static constexpr Dual2 constant(double v) { return {v, 0.0, 0.0}; }
  static constexpr Dual2 seed(double v) { return {v, 1.0, 0.0}; }
};

inline Dual2 operator+(const Dual2& a, const Dual2& b) {
  return {a.value + b.value, a.d1 + b.d1, a.d2 + b.d2};
}
inline Dual2 operator-(const Dual2& a, const Dual2& b) {
  return {a.value - b.value, a.d1 - b.d1, a.d2 - b.d2};
}
inline Dual2 operator-(const Dual2& a) { return {-a.value, -a.d1, -a.d2}; }
inline Dual2 operator*(const Dual2& a, const Dual2& b) {
  return {a.value * b.value, a.d1 * b.value + a.value * b.d1,
          a.d2 * b.value + 2.0 * a.d1 * b.d1 + a.value * b.d2};
}
inline Dual2 operator*(double s, const Dual2& a) {
  return {s * a.value, s * a.d1, s * a.d2};
}
// Caller guarantees b.value != 0.
inline Dual2 operator/(const Dual2& a, const Dual2& b) {
  const double q = a.value / b.value;
  const double q1 = (a.d1 - q * b.d1) / b.value;
  const double q2 = (a.d2 - 2.0 * q1 * b.d1 - q * b.d2) / b.value;
  return {q, q1, q2};
}

/// g(u) given g, g', g'' at u.value. Zero seed components never touch g' or
/// g'', so an infinite slope (sqrt at 0) does not leak into constant jets.
inline Dual2 chain(const Dual2& u, double g0, double g1, double g2) {
  Dual2 r{g0, 0.0, 0.0};
  if (u.d1 != 0.0) {
    r.d1 = g1 * u.d1;
    r.d2 = g2 * u.d1 * u.d1;
  }
  if (u.d2 != 0.0) r.d2 += g1 * u.d2;
  return r;
}

/// outer(s) expressed as a jet in s, composed with inner(x) = s.
inline Dual2 compose(const Dual2& outer, const Dual2& inner) {
  return chain(inner, outer.value, outer.d1, outer.d2);
}

}  // namespace secord
