#include "secord/integrator.hpp"

#include <sstream>

namespace secord {

std::string_view to_string(StopReason r) {
  switch (r) {
    case StopReason::Completed: return "completed";
    case StopReason::BlowUp: return "blow-up";
    case StopReason::StepSizeUnderflow: return "step-size-underflow";
  }
  return "unknown";
}

Dual2 hermite5(double xa, double xb, double ya, double yb, double da, double db,
               double aa, double ab, double x) {
  const double h = xb - xa;
  const double s = (x - xa) / h;
  const double s2 = s * s, s3 = s2 * s, s4 = s3 * s, s5 = s4 * s;

  const double H0 = 1 - 10 * s3 + 15 * s4 - 6 * s5;
  const double H1 = s - 6 * s3 + 8 * s4 - 3 * s5;
  const double H2 = 0.5 * s2 - 1.5 * s3 + 1.5 * s4 - 0.5 * s5;
  const double H3 = 0.5 * s3 - s4 + 0.5 * s5;
  const double H4 = -4 * s3 + 7 * s4 - 3 * s5;
  const double H5 = 10 * s3 - 15 * s4 + 6 * s5;

  const double D0 = -30 * s2 + 60 * s3 - 30 * s4;
  const double D1 = 1 - 18 * s2 + 32 * s3 - 15 * s4;
  const double D2 = s - 4.5 * s2 + 6 * s3 - 2.5 * s4;
  const double D3 = 1.5 * s2 - 4 * s3 + 2.5 * s4;
  const double D4 = -12 * s2 + 28 * s3 - 15 * s4;
  const double D5 = 30 * s2 - 60 * s3 + 30 * s4;

  const double E0 = -60 * s + 180 * s2 - 120 * s3;
  const double E1 = -36 * s + 96 * s2 - 60 * s3;
  const double E2 = 1 - 9 * s + 18 * s2 - 10 * s3;
  const double E3 = 3 * s - 12 * s2 + 10 * s3;
  const double E4 = -24 * s + 84 * s2 - 60 * s3;
  const double E5 = 60 * s - 180 * s2 + 120 * s3;

  const double m0 = h * da, m1 = h * db, q0 = h * h * aa, q1 = h * h * ab;
  const double v = H0 * ya + H1 * m0 + H2 * q0 + H3 * q1 + H4 * m1 + H5 * yb;
  const double dv = D0 * ya + D1 * m0 + D2 * q0 + D3 * q1 + D4 * m1 + D5 * yb;
  const double ddv = E0 * ya + E1 * m0 + E2 * q0 + E3 * q1 + E4 * m1 + E5 * yb;
  return {v, dv / h, ddv / (h * h)};
}

Trajectory::Trajectory(std::vector<Sample> samples, std::string method, double tol,
                       std::size_t steps, std::size_t rejected, StopReason reason)
    : samples_(std::move(samples)),
      method_(std::move(method)),
      tol_(tol),
      steps_(steps),
      rejected_(rejected),
      reason_(reason) {
  for (std::size_t i = 1; i < samples_.size(); ++i) {
    if (!(samples_[i].x > samples_[i - 1].x))
      throw Error(ErrorCode::InternalVerificationFailed, "verify", "Trajectory",
                  "trajectory abscissae are not strictly increasing", {samples_[i].x});
  }
  for (const auto& s : samples_) {
    if (!std::isfinite(s.y) || !std::isfinite(s.yp) || !std::isfinite(s.ypp))
      throw Error(ErrorCode::InternalVerificationFailed, "verify", "Trajectory",
                  "non-finite trajectory entry", {s.x});
  }
}

Dual2 Trajectory::at(double x) const {
  if (!covers(x)) {
    std::ostringstream msg;
    msg << "x=" << x << " outside trajectory [" << (samples_.empty() ? 0.0 : x_min()) << ", "
        << (samples_.empty() ? 0.0 : x_max()) << "]";
    throw Error(ErrorCode::OutOfDomain, "verify", "Trajectory::at", msg.str(), {x});
  }
  if (samples_.size() == 1) return {samples_[0].y, samples_[0].yp, samples_[0].ypp};
  auto it = std::upper_bound(samples_.begin(), samples_.end(), x,
                             [](double v, const Sample& s) { return v < s.x; });
  if (it == samples_.end()) --it;
  if (it == samples_.begin()) ++it;
  const Sample& a = *(it - 1);
  const Sample& b = *it;
  if (x == a.x) return {a.y, a.yp, a.ypp};
  if (x == b.x) return {b.y, b.yp, b.ypp};
  return hermite5(a.x, b.x, a.y, b.y, a.yp, b.yp, a.ypp, b.ypp, x);
}

namespace {

std::vector<Sample> to_samples(const Integration<2>& run) {
  std::vector<Sample> out;
  out.reserve(run.steps.size());
  for (const auto& s : run.steps) out.push_back({s.x, s.y[0], s.y[1], s.dy[1]});
  return out;
}

Integration<2> run_second_order(const SecondOrderRhs& rhs, double x0, double y0, double yp0,
                                double x_end, const IntegratorOptions& opt) {
  auto f = [&](double x, const State<2>& s) -> State<2> { return {s[1], rhs(x, s[0], s[1])}; };
  return dopri5<2>(f, x0, State<2>{y0, yp0}, x_end, opt);
}

[[noreturn]] void underflow(double x) {
  throw Error(ErrorCode::StepSizeUnderflow, "verify", "integrate_ivp",
              "step size underflow near x=" + std::to_string(x), {x});
}

}  // namespace

Trajectory integrate_ivp(const SecondOrderRhs& rhs, double x0, double y0, double yp0,
                         double x_end, const IntegratorOptions& opt, bool allow_early_stop) {
  Integration<2> run = run_second_order(rhs, x0, y0, yp0, x_end, opt);
  if (run.reason != StopReason::Completed && !allow_early_stop) underflow(run.steps.back().x);
  std::vector<Sample> samples = to_samples(run);
  if (x_end < x0) std::reverse(samples.begin(), samples.end());
  std::vector<double> stops;
  if (run.reason != StopReason::Completed) stops.push_back(run.steps.back().x);
  Trajectory t(std::move(samples), "dopri5", opt.rtol, run.accepted, run.rejected, run.reason);
  t.early_stops = std::move(stops);
  return t;
}

Trajectory integrate_two_sided(const SecondOrderRhs& rhs, double x0, double y0, double yp0,
                               double lo, double hi, const IntegratorOptions& opt,
                               bool allow_early_stop) {
  Integration<2> left = run_second_order(rhs, x0, y0, yp0, lo, opt);
  Integration<2> right = run_second_order(rhs, x0, y0, yp0, hi, opt);
  if (!allow_early_stop) {
    if (left.reason != StopReason::Completed) underflow(left.steps.back().x);
    if (right.reason != StopReason::Completed) underflow(right.steps.back().x);
  }
  std::vector<Sample> l = to_samples(left);
  std::vector<Sample> r = to_samples(right);
  std::reverse(l.begin(), l.end());
  // l ends at x0, r starts at x0
  if (!r.empty()) l.insert(l.end(), r.begin() + 1, r.end());
  StopReason reason = left.reason != StopReason::Completed ? left.reason : right.reason;
  std::vector<double> stops;
  if (left.reason != StopReason::Completed) stops.push_back(left.steps.back().x);
  if (right.reason != StopReason::Completed) stops.push_back(right.steps.back().x);
  Trajectory t(std::move(l), "dopri5", opt.rtol, left.accepted + right.accepted,
               left.rejected + right.rejected, reason);
  t.early_stops = std::move(stops);
  return t;
}

}  // namespace secord
