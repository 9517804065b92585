#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spcp/errors.hpp"

namespace spcp {

/**
 * Proper rational transfer function num(s)/den(s) of a continuous-time SISO
 * system.
 *
 * Both polynomials are stored in ascending powers of s, so `den[0]` is the
 * constant term and `den.back()` the leading coefficient. Trailing zero
 * coefficients of the numerator are trimmed on construction.
 */
class RationalTransferFunction {
 public:
  RationalTransferFunction() : num_{0.0}, den_{1.0} {}

  RationalTransferFunction(std::vector<double> num, std::vector<double> den)
      : num_(std::move(num)), den_(std::move(den)) {
    if (num_.empty()) {
      throw ConfigError("transfer function: numerator has no coefficients");
    }
    if (den_.empty()) {
      throw ConfigError("transfer function: denominator has no coefficients");
    }
    auto finite = [](double c) { return std::isfinite(c); };
    if (!std::all_of(num_.begin(), num_.end(), finite) ||
        !std::all_of(den_.begin(), den_.end(), finite)) {
      throw ConfigError("transfer function: non-finite coefficient");
    }
    if (den_.back() == 0.0) {
      throw ConfigError("transfer function: leading denominator coefficient is zero");
    }
    while (num_.size() > 1 && num_.back() == 0.0) {
      num_.pop_back();
    }
    if (num_.size() > den_.size()) {
      throw ConfigError("transfer function: improper (numerator degree " +
                        std::to_string(num_.size() - 1) + " > denominator degree " +
                        std::to_string(den_.size() - 1) + ")");
    }
  }

  const std::vector<double>& num() const { return num_; }
  const std::vector<double>& den() const { return den_; }

  std::size_t order() const { return den_.size() - 1; }
  bool strictly_proper() const { return num_.size() < den_.size(); }
  // True when s = 0 is a root of the denominator.
  bool has_integrator() const { return den_.front() == 0.0; }

  friend bool operator==(const RationalTransferFunction&,
                         const RationalTransferFunction&) = default;

 private:
  std::vector<double> num_;
  std::vector<double> den_;
};

struct PIParams {
  double kp = 0.0;
  double ki = 0.0;  // 1/s

  // (kp*s + ki)/s
  RationalTransferFunction to_transfer_function() const {
    if (!(ki >= 0.0) || !std::isfinite(ki) || !std::isfinite(kp)) {
      throw ConfigError("PI parameters: gains must be finite with ki >= 0");
    }
    return RationalTransferFunction({ki, kp}, {0.0, 1.0});
  }

  friend bool operator==(const PIParams&, const PIParams&) = default;
};

// x' = A x + B u, y = C x + D u. A is stored row-major; order 0 is a pure gain.
struct StateSpaceModel {
  std::size_t order = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;
  double d = 0.0;

  double a_at(std::size_t row, std::size_t col) const { return a[row * order + col]; }

  double output(std::span<const double> x, double u) const {
    double y = d * u;
    for (std::size_t i = 0; i < order; ++i) {
      y += c[i] * x[i];
    }
    return y;
  }

  // C x only, the part of the output that does not depend on the input.
  double state_output(std::span<const double> x) const { return output(x, 0.0); }

  void derivative(std::span<const double> x, double u, std::span<double> dx) const {
    for (std::size_t i = 0; i < order; ++i) {
      double acc = b[i] * u;
      for (std::size_t j = 0; j < order; ++j) {
        acc += a[i * order + j] * x[j];
      }
      dx[i] = acc;
    }
  }

  friend bool operator==(const StateSpaceModel&, const StateSpaceModel&) = default;
};

/// Controllable canonical realization.
///
/// The denominator is normalized to monic form; the state is
/// x = [q, q', ..., q^(n-1)] with den(d/dt) q = u. When the numerator and
/// denominator have equal degree the ratio of leading coefficients becomes D
/// and the division remainder populates C.
inline StateSpaceModel realize(const RationalTransferFunction& tf) {
  const auto& den = tf.den();
  const std::size_t n = tf.order();
  const double lead = den.back();

  std::vector<double> num(n + 1, 0.0);
  for (std::size_t i = 0; i < tf.num().size(); ++i) {
    num[i] = tf.num()[i] / lead;
  }

  StateSpaceModel m;
  m.order = n;
  m.a.assign(n * n, 0.0);
  m.b.assign(n, 0.0);
  m.c.assign(n, 0.0);
  m.d = num[n];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    m.a[i * n + i + 1] = 1.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    const double monic = den[j] / lead;
    m.a[(n - 1) * n + j] = -monic;
    m.c[j] = num[j] - m.d * monic;
  }
  if (n > 0) {
    m.b[n - 1] = 1.0;
  }
  return m;
}

inline double dc_gain(const RationalTransferFunction& tf) {
  if (tf.den().front() == 0.0) {
    throw ConfigError("dc_gain: no finite DC gain (denominator vanishes at s = 0)");
  }
  return tf.num().front() / tf.den().front();
}

/// Fixed-step classical Runge-Kutta integrator with reusable stage buffers.
///
/// `f(t, x, dx)` writes the time derivative of `x` into `dx`.
class Rk4Stepper {
 public:
  explicit Rk4Stepper(std::size_t size = 0) { resize(size); }

  void resize(std::size_t size) {
    k1_.assign(size, 0.0);
    k2_.assign(size, 0.0);
    k3_.assign(size, 0.0);
    k4_.assign(size, 0.0);
    tmp_.assign(size, 0.0);
  }

  template <class Derivative>
  void step(Derivative&& f, std::span<double> x, double t, double dt) {
    const std::size_t n = x.size();
    if (k1_.size() != n) {
      resize(n);
    }
    const double half = 0.5 * dt;

    f(t, std::span<const double>(x.data(), n), std::span<double>(k1_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k1_[i];
    f(t + half, std::span<const double>(tmp_), std::span<double>(k2_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + half * k2_[i];
    f(t + half, std::span<const double>(tmp_), std::span<double>(k3_));
    for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + dt * k3_[i];
    f(t + dt, std::span<const double>(tmp_), std::span<double>(k4_));
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += dt / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }
  }

 private:
  std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

/// One RK4 step of x' = A x + B u(t); the input is sampled at t, t + dt/2 and
/// t + dt. Throws NumericFailure if the result is not finite.
[[nodiscard]] inline std::vector<double> rk4_step(const StateSpaceModel& model,
                                    std::span<const double> state,
                                    const std::function<double(double)>& input_at,
                                    double t, double dt) {
  if (!(dt > 0.0)) {
    throw ConfigError("rk4_step: dt must be positive");
  }
  if (state.size() != model.order) {
    throw ConfigError("rk4_step: state size does not match model order");
  }
  std::vector<double> x(state.begin(), state.end());
  Rk4Stepper stepper(x.size());
  stepper.step(
      [&](double ts, std::span<const double> xs, std::span<double> dx) {
        model.derivative(xs, input_at(ts), dx);
      },
      std::span<double>(x), t, dt);
  for (double v : x) {
    if (!std::isfinite(v)) {
      throw NumericFailure("rk4_step: non-finite state at t=" + std::to_string(t + dt));
    }
  }
  return x;
}

/// Exact unit-step response of a strictly proper first-order system, or of a
/// strictly proper second-order system with complex poles.
inline double analytic_step_response(const RationalTransferFunction& tf, double t) {
  if (!tf.strictly_proper()) {
    throw ConfigError("analytic_step_response: transfer function must be strictly proper");
  }
  if (t <= 0.0) {
    return 0.0;
  }
  const auto& den = tf.den();
  const double lead = den.back();
  auto num_at = [&](std::size_t i) {
    return i < tf.num().size() ? tf.num()[i] / lead : 0.0;
  };

  if (tf.order() == 1) {
    const double a = den[0] / lead;
    const double k = num_at(0);
    if (a == 0.0) {
      return k * t;
    }
    return k / a * (1.0 - std::exp(-a * t));
  }

  if (tf.order() == 2) {
    const double a1 = den[1] / lead;
    const double a0 = den[0] / lead;
    const double sigma = 0.5 * a1;
    const double wd2 = a0 - sigma * sigma;
    if (!(wd2 > 0.0)) {
      throw ConfigError("analytic_step_response: second-order system without complex poles");
    }
    const double wd = std::sqrt(wd2);
    const double decay = std::exp(-sigma * t);
    const double b0 = num_at(0);
    const double b1 = num_at(1);
    // b0/(s^2 + a1 s + a0) step plus b1 times the impulse response of 1/(...)
    const double step0 =
        b0 / a0 * (1.0 - decay * (std::cos(wd * t) + sigma / wd * std::sin(wd * t)));
    const double step1 = b1 * decay * std::sin(wd * t) / wd;
    return step0 + step1;
  }

  throw ConfigError("analytic_step_response: unsupported order " + std::to_string(tf.order()));
}

}  // namespace spcp
