#include "polyfilt/ode.hpp"

#include "polyfilt/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace polyfilt {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200, e6 = 22.0 / 525,
                 e7 = -1.0 / 40;

double err_norm(const Vector& err, const Vector& y0, const Vector& y1, const OdeOptions& o) {
  auto n = err.size();
  if (o.error_components > 0) n = std::min<Eigen::Index>(n, o.error_components);
  if (n == 0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sc = o.abs_tol + o.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
    const double r = err(i) / sc;
    s += r * r;
  }
  return std::sqrt(s / static_cast<double>(n));
}

Vector hermite(double t0, const Vector& y0, const Vector& f0, double t1, const Vector& y1, const Vector& f1, double t) {
  const double h = t1 - t0;
  if (h == 0.0) return y1;
  const double s = (t - t0) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

}  // namespace

std::vector<Vector> integrate_rk45(const OdeRhs& f, const Vector& y0, std::span<const double> output_times,
                                   const OdeOptions& opts, std::span<const double> breakpoints) {
  if (output_times.empty()) return {};
  for (std::size_t i = 1; i < output_times.size(); ++i)
    if (output_times[i] < output_times[i - 1]) throw std::invalid_argument("integrate_rk45: output times must be sorted");
  if (!y0.allFinite()) throw NumericalError("integrate_rk45: non-finite initial state");

  const double t_start = output_times.front();
  const double t_end = output_times.back();
  std::vector<double> stops;
  for (double b : breakpoints)
    if (b > t_start && b < t_end) stops.push_back(b);
  std::sort(stops.begin(), stops.end());
  stops.push_back(t_end);

  std::vector<Vector> out;
  out.reserve(output_times.size());
  std::size_t next_out = 0;

  double t = t_start;
  Vector y = y0;
  const auto n = y.size();
  Vector k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n), err(n);
  f(t, y, k1);

  while (next_out < output_times.size() && output_times[next_out] <= t) out.push_back(y), ++next_out;
  if (t_end == t_start) return out;

  double h = opts.initial_step;
  if (h <= 0.0) {
    // Hairer-Wanner starting step.
    const double d0 = err_norm(y, Vector::Zero(n), y, opts);
    const double d1 = err_norm(k1, Vector::Zero(n), y, opts);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t_start);
    tmp = y + h0 * k1;
    f(t + h0, tmp, k2);
    const double d2 = err_norm(k2 - k1, Vector::Zero(n), y, opts) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 1.0 / 5.0);
    h = std::min(100 * h0, h1);
  }
  h = std::min(h, opts.max_step);

  std::size_t stop_idx = 0;
  long steps = 0;
  while (t < t_end) {
    while (stops[stop_idx] <= t) ++stop_idx;
    const double stop = stops[stop_idx];
    bool hit_stop = false;
    if (t + h >= stop || stop - (t + h) < 1e-12 * std::max(1.0, std::abs(stop))) {
      h = stop - t;
      hit_stop = true;
    }
    if (++steps > opts.max_steps) throw NumericalError("integrate_rk45: too many steps");
    if (h < 1e-14 * std::max(1.0, std::abs(t))) throw NumericalError("integrate_rk45: step size underflow");

    // Stages at the right end of a segment stay left of the jump.
    const double t_end_stage = hit_stop ? std::nextafter(stop, t) : t + h;
    tmp = y + h * a21 * k1;
    f(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    f(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    f(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    f(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    f(t_end_stage, tmp, k6);
    y5 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    f(t_end_stage, y5, k7);
    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    const double en = err_norm(err, y, y5, opts);
    if (!std::isfinite(en) || !y5.allFinite()) {
      h *= 0.25;
      continue;
    }
    if (en <= 1.0) {
      const double t_new = hit_stop ? stop : t + h;
      while (next_out < output_times.size() && output_times[next_out] <= t_new) {
        const double to = output_times[next_out];
        out.push_back(to == t_new ? y5 : hermite(t, y, k1, t_new, y5, k7, to));
        ++next_out;
      }
      t = t_new;
      y = y5;
      k1 = k7;
      if (hit_stop && t < t_end) f(t, y, k1);  // right-hand side may jump here
      const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
      h = std::min(h * fac, opts.max_step);
    } else {
      h *= std::clamp(0.9 * std::pow(en, -0.2), 0.1, 0.9);
    }
  }
  while (next_out < output_times.size()) out.push_back(y), ++next_out;
  return out;
}

}  // namespace polyfilt
