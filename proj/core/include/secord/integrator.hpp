#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "secord/dual.hpp"
#include "secord/error.hpp"

namespace secord {

struct IntegratorOptions {
  double rtol = 1e-9;
  double atol = 1e-9;
  double initial_step = 0.0;  // 0 selects a starting step automatically
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 0.0;    // > 0 disables error control
  double blowup = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 2'000'000;
};

enum class StopReason { Completed, BlowUp, StepSizeUnderflow };

std::string_view to_string(StopReason r);

template <std::size_t N>
using State = std::array<double, N>;

template <std::size_t N>
struct StepRecord {
  double x = 0.0;
  State<N> y{};
  State<N> dy{};
};

template <std::size_t N>
struct Integration {
  std::vector<StepRecord<N>> steps;  // includes the initial point
  StopReason reason = StopReason::Completed;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

template <std::size_t N>
double error_norm(const State<N>& err, const State<N>& y0, const State<N>& y1,
                  const IntegratorOptions& o) {
  double m = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sc = o.atol + o.rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    m = std::max(m, std::abs(err[i]) / sc);
  }
  return m;
}

template <std::size_t N>
State<N> axpy(const State<N>& y, double h, std::initializer_list<std::pair<double, const State<N>*>> ks) {
  State<N> out = y;
  for (const auto& [c, k] : ks) {
    if (c == 0.0) continue;
    for (std::size_t i = 0; i < N; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

}  // namespace detail

/// Embedded Dormand-Prince 5(4) with PI step-size control, integrating
/// y' = rhs(x, y) from x0 to x1 (either direction). Exceptions of type
/// Error thrown by rhs inside a trial step shrink the step like a rejection.
template <std::size_t N, class Rhs>
Integration<N> dopri5(Rhs&& rhs, double x0, const State<N>& y0, double x1,
                      const IntegratorOptions& opt) {
  using namespace detail;
  Integration<N> out;
  const double dir = x1 >= x0 ? 1.0 : -1.0;
  State<N> y = y0;
  double x = x0;
  State<N> k1 = rhs(x, y);
  ++out.evaluations;
  out.steps.push_back({x, y, k1});
  if (x0 == x1) return out;

  const double span = std::abs(x1 - x0);
  double h = 0.0;
  if (opt.fixed_step > 0.0) {
    h = std::min(opt.fixed_step, span);
  } else if (opt.initial_step > 0.0) {
    h = std::min(opt.initial_step, span);
  } else {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opt.atol + opt.rtol * std::abs(y[i]);
      d0 = std::max(d0, std::abs(y[i]) / sc);
      d1 = std::max(d1, std::abs(k1[i]) / sc);
    }
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, span);
    double d2 = 0.0;
    try {
      const State<N> yt = axpy<N>(y, dir * h0, {{1.0, &k1}});
      const State<N> kt = rhs(x + dir * h0, yt);
      ++out.evaluations;
      for (std::size_t i = 0; i < N; ++i) {
        const double sc = opt.atol + opt.rtol * std::abs(y[i]);
        d2 = std::max(d2, std::abs(kt[i] - k1[i]) / sc / h0);
      }
    } catch (const Error&) {
      d2 = 1.0 / h0;
    }
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min({100.0 * h0, h1, span, opt.max_step});
  }

  double err_prev = 1e-4;
  bool last_rejected = false;
  constexpr double kSafety = 0.9;
  while (out.accepted + out.rejected < opt.max_steps) {
    const double remaining = std::abs(x1 - x);
    if (remaining <= 0.0) break;
    const bool final_step = h >= remaining || remaining - h <= 1e-9 * h;
    if (final_step) h = remaining;
    if (x + dir * h == x || h < 1e-14 * std::max(1.0, std::abs(x))) {
      out.reason = StopReason::StepSizeUnderflow;
      return out;
    }
    const double hs = dir * h;

    State<N> k2, k3, k4, k5, k6, k7, y5;
    bool stage_failed = false;
    try {
      k2 = rhs(x + c2 * hs, axpy<N>(y, hs, {{a21, &k1}}));
      k3 = rhs(x + c3 * hs, axpy<N>(y, hs, {{a31, &k1}, {a32, &k2}}));
      k4 = rhs(x + c4 * hs, axpy<N>(y, hs, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
      k5 = rhs(x + c5 * hs, axpy<N>(y, hs, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
      k6 = rhs(x + hs, axpy<N>(y, hs, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
      y5 = axpy<N>(y, hs, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
      k7 = rhs(x + hs, y5);
      out.evaluations += 6;
    } catch (const Error&) {
      stage_failed = true;
    }
    bool finite = !stage_failed;
    if (finite) {
      for (std::size_t i = 0; i < N; ++i) finite = finite && std::isfinite(y5[i]) && std::isfinite(k7[i]);
    }

    double err = 0.0;
    if (finite && opt.fixed_step <= 0.0) {
      State<N> e{};
      for (std::size_t i = 0; i < N; ++i)
        e[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err = error_norm<N>(e, y, y5, opt);
    }

    if (!finite || err > 1.0) {
      ++out.rejected;
      if (opt.fixed_step > 0.0) {
        out.reason = StopReason::StepSizeUnderflow;
        return out;
      }
      const double fac = finite ? std::max(0.2, kSafety * std::pow(err, -0.2)) : 0.25;
      h *= fac;
      last_rejected = true;
      continue;
    }

    x = final_step ? x1 : x + hs;
    y = y5;
    k1 = k7;
    ++out.accepted;
    out.steps.push_back({x, y, k1});
    for (std::size_t i = 0; i < N; ++i) {
      if (std::abs(y[i]) > opt.blowup) {
        out.reason = StopReason::BlowUp;
        return out;
      }
    }
    if (final_step) break;

    if (opt.fixed_step > 0.0) continue;
    double fac = err == 0.0 ? 5.0
                            : kSafety * std::pow(err, -0.7 / 5.0) * std::pow(err_prev, 0.4 / 5.0);
    fac = std::clamp(fac, 0.2, 5.0);
    if (last_rejected) fac = std::min(fac, 1.0);
    h = std::min(h * fac, opt.max_step);
    err_prev = std::max(err, 1e-4);
    last_rejected = false;
  }
  if (std::abs(x1 - x) > 0.0 && out.reason == StopReason::Completed)
    out.reason = StopReason::StepSizeUnderflow;
  return out;
}

/// Quintic Hermite interpolation on [xa, xb] from values, first and second
/// derivatives at both ends. Returns the jet (value, d/dx, d2/dx2) at x.
Dual2 hermite5(double xa, double xb, double ya, double yb, double da, double db,
               double aa, double ab, double x);

struct Sample {
  double x = 0.0;
  double y = 0.0;
  double yp = 0.0;
  double ypp = 0.0;
};

/// y'' = G(x, y, y')
using SecondOrderRhs = std::function<double(double x, double y, double yp)>;

/// Ordered samples of a second-order IVP solution with quintic Hermite
/// dense output.
class Trajectory {
 public:
  Trajectory() = default;
  Trajectory(std::vector<Sample> samples, std::string method, double tol,
             std::size_t steps, std::size_t rejected, StopReason reason);

  const std::vector<Sample>& samples() const { return samples_; }
  double x_min() const { return samples_.front().x; }
  double x_max() const { return samples_.back().x; }
  bool covers(double x) const { return !samples_.empty() && x >= x_min() && x <= x_max(); }
  Dual2 at(double x) const;

  const std::string& method() const { return method_; }
  double tolerance() const { return tol_; }
  std::size_t steps() const { return steps_; }
  std::size_t rejected() const { return rejected_; }
  StopReason reason() const { return reason_; }
  /// Where integration stopped early (BlowUp/StepSizeUnderflow), one per side.
  std::vector<double> early_stops;

 private:
  std::vector<Sample> samples_;
  std::string method_;
  double tol_ = 0.0;
  std::size_t steps_ = 0;
  std::size_t rejected_ = 0;
  StopReason reason_ = StopReason::Completed;
};

/// Integrate y'' = G(x, y, y') from (x0, y0, yp0) to x_end. Throws
/// StepSizeUnderflow unless `allow_early_stop`, in which case the truncated
/// trajectory is returned with its stop reason.
Trajectory integrate_ivp(const SecondOrderRhs& rhs, double x0, double y0, double yp0,
                         double x_end, const IntegratorOptions& opt,
                         bool allow_early_stop = false);

/// Integrate both ways from an interior x0 to lo and hi and merge.
Trajectory integrate_two_sided(const SecondOrderRhs& rhs, double x0, double y0, double yp0,
                               double lo, double hi, const IntegratorOptions& opt,
                               bool allow_early_stop = false);

}  // namespace secord
