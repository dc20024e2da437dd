#pragma once

#include "polyfilt/linalg.hpp"

#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace polyfilt {

struct OdeOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-8;
  double initial_step = 0.0;  // 0: automatic
  double max_step = std::numeric_limits<double>::infinity();
  long max_steps = 10'000'000;
  // Leading components that enter step control; 0 means all. Trailing
  // components ride along on the steps chosen for the leading ones.
  long error_components = 0;
};

using OdeRhs = std::function<void(double t, const Vector& y, Vector& dydt)>;

// Dormand-Prince 5(4) with step control; values at output_times come from
// cubic Hermite interpolation on accepted steps. output_times must be
// non-decreasing and start at the initial time. Steps never cross a
// breakpoint (useful for piecewise-constant right-hand sides).
std::vector<Vector> integrate_rk45(const OdeRhs& f, const Vector& y0, std::span<const double> output_times,
                                   const OdeOptions& opts = {}, std::span<const double> breakpoints = {});

}  // namespace polyfilt
