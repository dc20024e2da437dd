#pragma once

#include "polyfilt/expm.hpp"
#include "polyfilt/linalg.hpp"
#include "polyfilt/multiindex.hpp"
#include "polyfilt/ode.hpp"
#include "polyfilt/polyssm.hpp"

#include <algorithm>
#include <optional>
#include <span>
#include <vector>

namespace polyfilt {

// Generator coefficients b^c_{lambda,mu}, piecewise constant in time: the
// matrix segments[i] applies on [starts[i], starts[i+1]).
class GeneratorMatrix {
 public:
  GeneratorMatrix() = default;
  static GeneratorMatrix constant(IndexBasis basis, Matrix bc);
  static GeneratorMatrix piecewise(IndexBasis basis, std::vector<double> starts, std::vector<Matrix> segments);

  const IndexBasis& basis() const { return basis_; }
  int dim() const { return basis_.dim(); }
  int order() const { return basis_.order(); }
  bool is_constant() const { return segments_.size() == 1; }

  const Matrix& at(double t) const;
  const std::vector<double>& starts() const { return starts_; }
  const std::vector<Matrix>& segments() const { return segments_; }
  double entry(const MultiIndex& lambda, const MultiIndex& mu, double t = 0.0) const;

 private:
  IndexBasis basis_;
  std::vector<double> starts_;
  std::vector<Matrix> segments_;
};

class PolyProcess {
 public:
  PolyProcess() = default;
  PolyProcess(GeneratorMatrix generator, Vector initial_moments);

  int dim() const { return gen_.dim(); }
  int order() const { return gen_.order(); }
  const GeneratorMatrix& generator() const { return gen_; }
  const Vector& initial_moments() const { return m0_; }

 private:
  GeneratorMatrix gen_;
  Vector m0_;
};

// Values on a time grid; Hold is right-continuous piecewise constant,
// Linear interpolates, Hermite interpolates with supplied derivatives.
// Outside the grid the end values are held.
template <class T>
class TimeFunction {
 public:
  enum class Interp { Hold, Linear, Hermite };

  TimeFunction() = default;
  TimeFunction(std::vector<double> times, std::vector<T> values, Interp interp)
      : times_(std::move(times)), values_(std::move(values)), interp_(interp) {
    if (times_.empty() || times_.size() != values_.size())
      throw std::invalid_argument("TimeFunction: times and values must be non-empty and of equal length");
    for (std::size_t i = 1; i < times_.size(); ++i)
      if (!(times_[i] > times_[i - 1])) throw std::invalid_argument("TimeFunction: times must increase strictly");
  }
  TimeFunction(std::vector<double> times, std::vector<T> values, std::vector<T> derivatives)
      : TimeFunction(std::move(times), std::move(values), Interp::Hermite) {
    if (derivatives.size() != values_.size()) throw std::invalid_argument("TimeFunction: derivative count mismatch");
    derivs_ = std::move(derivatives);
  }
  static TimeFunction constant(T v) { return TimeFunction({0.0}, {std::move(v)}, Interp::Hold); }

  T at(double t) const {
    if (t <= times_.front() || times_.size() == 1) return values_.front();
    if (t >= times_.back()) return values_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const auto i = static_cast<std::size_t>(it - times_.begin()) - 1;
    if (interp_ == Interp::Hold) return values_[i];
    const double h = times_[i + 1] - times_[i];
    const double w = (t - times_[i]) / h;
    if (interp_ == Interp::Linear) return (1.0 - w) * values_[i] + w * values_[i + 1];
    const double h00 = (1 + 2 * w) * (1 - w) * (1 - w), h10 = w * (1 - w) * (1 - w);
    const double h01 = w * w * (3 - 2 * w), h11 = w * w * (w - 1);
    return h00 * values_[i] + (h10 * h) * derivs_[i] + h01 * values_[i + 1] + (h11 * h) * derivs_[i + 1];
  }

  bool is_constant() const { return values_.size() == 1; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<T>& values() const { return values_; }
  const std::vector<T>& derivatives() const { return derivs_; }
  Interp interp() const { return interp_; }

 private:
  std::vector<double> times_;
  std::vector<T> values_;
  std::vector<T> derivs_;
  Interp interp_ = Interp::Hold;
};

// dX = (a + A X) dt + B dW with B B^T = C.
struct GaussianOU {
  TimeFunction<Vector> a;
  TimeFunction<Matrix> A;
  TimeFunction<Matrix> C;
  Vector mu0;
  Matrix Sigma0;

  int dim() const { return static_cast<int>(mu0.size()); }
  void validate() const;
  // Knots of a, A and C (where the right-hand sides are not smooth).
  std::vector<double> knots() const;
};

// exp products F(t_k) F(t_{k-1})^{-1}; times must be non-decreasing.
PolySSM discretize(const PolyProcess& proc, std::span<const double> times);

// Exact E X(t)^lambda over the full basis at each time.
std::vector<Vector> process_moments(const PolyProcess& proc, std::span<const double> times);

// C(t)_{ij} = sum_mu a_{1_i+1_j,mu} E X(t)^mu.
Matrix diffusion_covariance(const PolyProcess& proc, double t, const Vector& moments);

GaussianOU gaussian_equivalent_continuous(const PolyProcess& proc, std::span<const double> grid);

// Order-2 polynomial process of an OU with constant coefficients.
PolyProcess lift_ou(const GaussianOU& ou);

struct MomentTrajectory {
  std::vector<double> times;
  std::vector<Vector> mean;
  std::vector<Matrix> second;  // P(t)
  // P(s, t) = E X(t) X(s)^T for grid points t >= s; empty when not requested
  // or before s.
  std::vector<Matrix> cross;
  std::optional<std::size_t> cross_from;
};

MomentTrajectory moment_ode(const GaussianOU& model, const Vector& mu0, const Matrix& P0,
                            std::span<const double> grid, std::optional<std::size_t> cross_from = std::nullopt,
                            const OdeOptions& opts = {});

MomentTrajectory moment_ode(const PolyProcess& proc, std::span<const double> grid,
                            std::optional<std::size_t> cross_from = std::nullopt, const OdeOptions& opts = {});

// 0, dt, 2 dt, ..., t_end (last step shortened to land on t_end).
std::vector<double> uniform_grid(double t_end, double dt);

}  // namespace polyfilt
