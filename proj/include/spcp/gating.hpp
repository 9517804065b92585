#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "spcp/errors.hpp"

namespace spcp {

/// Periodic binary switching function.
///
/// Within each period the gate is 1 on the half-open interval
/// [phase, phase + active_fraction * period) and 0 elsewhere. A disabled
/// schedule yields 0 for both the gate and its complement.
struct GateSchedule {
  double period = 1.0;
  double active_fraction = 1.0;
  double phase = 0.0;
  bool enabled = true;

  void validate(const std::string& name = "gate") const {
    if (!(period > 0.0) || !std::isfinite(period)) {
      throw ConfigError(name + ".period must be a positive finite number");
    }
    if (!(active_fraction >= 0.0 && active_fraction <= 1.0)) {
      throw ConfigError(name + ".active_fraction must lie in [0, 1]");
    }
    if (!std::isfinite(phase)) {
      throw ConfigError(name + ".phase must be finite");
    }
  }

  double active_duration() const { return active_fraction * period; }

  friend bool operator==(const GateSchedule&, const GateSchedule&) = default;
};

namespace detail {

// Position of t inside its period, in [0, period). Points within
// 1e-9 * period of a period boundary or of the active/inactive boundary are
// snapped onto it so grid times like k * dt land on the intended side.
inline double position_in_period(const GateSchedule& s, double t) {
  const double tol = 1e-9 * s.period;
  double x = std::fmod(t - s.phase, s.period);
  if (x < 0.0) x += s.period;
  if (x >= s.period - tol) x = 0.0;
  const double edge = s.active_duration();
  if (std::abs(x - edge) <= tol) x = edge;
  return x;
}

}  // namespace detail

inline int gate_value(const GateSchedule& s, double t) {
  if (!s.enabled) return 0;
  if (s.active_fraction >= 1.0) return 1;
  if (s.active_fraction <= 0.0) return 0;
  return detail::position_in_period(s, t) < s.active_duration() ? 1 : 0;
}

inline int gate_complement(const GateSchedule& s, double t) {
  return s.enabled ? 1 - gate_value(s, t) : 0;
}

// Values of the four switching functions at one instant.
struct GateSet {
  int w = 1;
  int w_bar = 0;
  int u = 1;
  int u_bar = 0;

  friend bool operator==(const GateSet&, const GateSet&) = default;
};

inline GateSet gate_set_at(const GateSchedule& w, const GateSchedule& u, double t) {
  if (!w.enabled) {
    throw ConfigError("w gate must stay enabled: a main path must always exist");
  }
  return GateSet{gate_value(w, t), gate_complement(w, t), gate_value(u, t),
                 gate_complement(u, t)};
}

/// Instants in (t0, t1) at which the gate value changes, ascending. A switch
/// exactly at t0 is not reported: nothing changes inside the window there.
inline std::vector<double> transitions_in(const GateSchedule& s, double t0, double t1) {
  std::vector<double> out;
  if (!s.enabled || s.active_fraction <= 0.0 || s.active_fraction >= 1.0 || !(t0 < t1)) {
    return out;
  }
  const double tol = 1e-9 * s.period;
  const double edge = s.active_duration();
  auto k = static_cast<long long>(std::floor((t0 - s.phase) / s.period)) - 1;
  for (;; ++k) {
    const double start = s.phase + static_cast<double>(k) * s.period;
    if (start >= t1 - tol) break;
    for (double instant : {start, start + edge}) {
      if (instant > t0 + tol && instant < t1 - tol) {
        out.push_back(instant);
      }
    }
  }
  return out;
}

}  // namespace spcp
