#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/gating.hpp"
#include "spcp/lti.hpp"

namespace spcp {

/// One control path: its reference, controller dynamics and the plant output
/// it regulates while active.
struct PathConfig {
  double setpoint = 0.0;
  RationalTransferFunction controller;
  std::size_t measurement_index = 0;
  // Gain of the integrator cascaded into the sync-error path when the
  // controller has no pole at the origin; see augment_integrator().
  double sync_error_gain = 1.0;
  bool sync_integrator = false;

  static PathConfig pi(double setpoint, PIParams gains, std::size_t measurement_index) {
    PathConfig p;
    p.setpoint = setpoint;
    p.controller = gains.to_transfer_function();
    p.measurement_index = measurement_index;
    return p;
  }

  friend bool operator==(const PathConfig&, const PathConfig&) = default;
};

/// Adds an integrator to the sync-error path of a controller that lacks one.
///
/// The gated sync error e is fed to the controller as e + k_e * xi with
/// xi' = e, so a background path reaches zero steady-state sync error. The
/// reference path is untouched. Controllers that already integrate (PI)
/// are returned unchanged.
inline PathConfig augment_integrator(PathConfig path) {
  path.sync_integrator = !path.controller.has_integrator();
  return path;
}

enum class PathRole { active, background };

/// Signal entering a path's controller before any sync-path augmentation:
/// the reference error for the active path, the gated output mismatch
/// against the active path for a background one.
inline double path_drive_input(const PathConfig& path, PathRole role, int sync_gate,
                               double measurement, double active_output,
                               double own_output) {
  if (role == PathRole::active) {
    return path.setpoint - measurement;
  }
  return static_cast<double>(sync_gate) * (active_output - own_output);
}

/// Y_c = w * X_c1 + w_bar * X_c2 with the remaining paths never selected.
inline double controller_output(const GateSet& g, std::span<const double> outputs) {
  if (outputs.size() == 1) {
    return outputs[0];
  }
  return static_cast<double>(g.w) * outputs[0] + static_cast<double>(g.w_bar) * outputs[1];
}

// Algebraic quantities of every path at one instant.
struct Resolution {
  std::size_t active = 0;
  double y_c = 0.0;
  std::vector<double> outputs;      // X_ci
  std::vector<double> inputs;       // controller input, augmentation included
  std::vector<double> sync_errors;  // gated e_i; 0 for the active path
};

/// Synced parallel control paths.
///
/// Path 0 is active while w = 1 and path 1 while w_bar = 1; any further paths
/// stay in the background permanently. Every background path feeds the gated
/// mismatch (active output - own output) into its controller. Because the
/// controller's direct feedthrough D puts X_i on both sides of its own output
/// equation, the scalar loop is solved in closed form:
///
///   X_i = (C z_i + D (X_act + k_e xi_i)) / (1 + D)      sync gate open
///   X_i =  C z_i + D k_e xi_i                          sync gate closed
///
/// Sync gates: path 0 uses u_bar, path 1 uses u, extra paths use u + u_bar.
class SyncedController {
 public:
  using MeasurementProvider = std::function<std::vector<double>(double)>;

  SyncedController(std::vector<PathConfig> paths, GateSchedule w, GateSchedule u)
      : paths_(std::move(paths)), w_(w), u_(u) {
    if (paths_.empty()) {
      throw ConfigError("controller needs at least one path");
    }
    w_.validate("w_gate");
    u_.validate("u_gate");
    if (!w_.enabled) {
      throw ConfigError("w_gate must be enabled: a main path must always exist");
    }
    std::size_t offset = 0;
    for (std::size_t i = 0; i < paths_.size(); ++i) {
      models_.push_back(realize(paths_[i].controller));
      offsets_.push_back(offset);
      offset += models_.back().order + (paths_[i].sync_integrator ? 1 : 0);
      if (paths_.size() > 1 && std::abs(1.0 + models_.back().d) < 1e-12) {
        throw ConfigError("path" + std::to_string(i + 1) +
                          ": singular sync loop (1 + direct feedthrough = 0)");
      }
      if (!std::isfinite(paths_[i].setpoint) || !std::isfinite(paths_[i].sync_error_gain)) {
        throw ConfigError("path" + std::to_string(i + 1) + ": non-finite parameter");
      }
    }
    offsets_.push_back(offset);
    state_.assign(offset, 0.0);
    last_ = make_resolution();
  }

  std::size_t path_count() const { return paths_.size(); }
  std::size_t state_size() const { return offsets_.back(); }
  std::size_t path_state_size(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }
  const PathConfig& path(std::size_t i) const { return paths_[i]; }
  const StateSpaceModel& model(std::size_t i) const { return models_[i]; }
  const GateSchedule& w_schedule() const { return w_; }
  const GateSchedule& u_schedule() const { return u_; }

  GateSet gates_at(double t) const { return gate_set_at(w_, u_, t); }

  std::size_t active_index(const GateSet& g) const {
    return (paths_.size() == 1 || g.w == 1) ? 0 : 1;
  }

  int sync_gate(std::size_t i, const GateSet& g) const {
    if (i == 0) return g.u_bar;
    if (i == 1) return g.u;
    return g.u + g.u_bar;
  }

  Resolution make_resolution() const {
    Resolution r;
    r.outputs.assign(paths_.size(), 0.0);
    r.inputs.assign(paths_.size(), 0.0);
    r.sync_errors.assign(paths_.size(), 0.0);
    return r;
  }

  /// Solves every path output for the given state. `measurements` is indexed
  /// by PathConfig::measurement_index; only the active path reads it.
  void resolve(const GateSet& g, std::span<const double> state,
               std::span<const double> measurements, Resolution& out) const {
    const std::size_t act = active_index(g);
    out.active = act;

    {
      const auto& m = models_[act];
      const auto z = path_span(state, act);
      const double meas = measurements[paths_[act].measurement_index];
      const double v = path_drive_input(paths_[act], PathRole::active, 0, meas, 0.0, 0.0) +
                       augmentation(act, z);
      out.inputs[act] = v;
      out.outputs[act] = m.state_output(z) + m.d * v;
      out.sync_errors[act] = 0.0;
    }
    const double x_act = out.outputs[act];

    for (std::size_t i = 0; i < paths_.size(); ++i) {
      if (i == act) continue;
      const auto& m = models_[i];
      const auto z = path_span(state, i);
      const int gate = sync_gate(i, g);
      const double bias = augmentation(i, z);
      const double x = gate != 0 ? (m.state_output(z) + m.d * (x_act + bias)) / (1.0 + m.d)
                                 : m.state_output(z) + m.d * bias;
      const double e =
          path_drive_input(paths_[i], PathRole::background, gate, 0.0, x_act, x);
      out.outputs[i] = x;
      out.sync_errors[i] = e;
      out.inputs[i] = e + bias;
    }
    out.y_c = spcp::controller_output(g, out.outputs);
  }

  // Time derivative of the controller state given a resolution of the same
  // state.
  void derivative(std::span<const double> state, const Resolution& r,
                  std::span<double> dstate) const {
    for (std::size_t i = 0; i < paths_.size(); ++i) {
      const auto& m = models_[i];
      const std::size_t off = offsets_[i];
      m.derivative(state.subspan(off, m.order), r.inputs[i], dstate.subspan(off, m.order));
      if (paths_[i].sync_integrator) {
        dstate[off + m.order] = r.sync_errors[i];
      }
    }
  }

  std::span<const double> state() const { return state_; }

  void set_state(std::span<const double> s) {
    if (s.size() != state_.size()) {
      throw ConfigError("controller state has wrong size");
    }
    state_.assign(s.begin(), s.end());
  }

  void set_path_state(std::size_t i, std::span<const double> s) {
    if (s.size() != path_state_size(i)) {
      throw ConfigError("path" + std::to_string(i + 1) + " state has wrong size");
    }
    std::copy(s.begin(), s.end(), state_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]));
  }

  const Resolution& resolve_outputs(double t, std::span<const double> measurements) {
    resolve(gates_at(t), state_, measurements, last_);
    return last_;
  }

  const Resolution& last_resolution() const { return last_; }
  double controller_output() const { return last_.y_c; }

  /// Advances the path states over [t, t + dt) with gates held at their value
  /// at t. Outputs are re-resolved at every RK4 stage.
  void advance_states(double t, double dt, const MeasurementProvider& measurements) {
    if (!(dt > 0.0)) {
      throw ConfigError("advance_states: dt must be positive");
    }
    const GateSet g = gates_at(t);
    Resolution r = make_resolution();
    stepper_.step(
        [&](double ts, std::span<const double> x, std::span<double> dx) {
          const auto meas = measurements(ts);
          resolve(g, x, meas, r);
          derivative(x, r, dx);
        },
        std::span<double>(state_), t, dt);
    for (double v : state_) {
      if (!std::isfinite(v)) {
        throw NumericFailure("controller state became non-finite at t=" + std::to_string(t + dt));
      }
    }
  }

 private:
  std::span<const double> path_span(std::span<const double> state, std::size_t i) const {
    return state.subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

  double augmentation(std::size_t i, std::span<const double> z) const {
    if (!paths_[i].sync_integrator) return 0.0;
    return paths_[i].sync_error_gain * z[models_[i].order];
  }

  std::vector<PathConfig> paths_;
  GateSchedule w_;
  GateSchedule u_;
  std::vector<StateSpaceModel> models_;
  std::vector<std::size_t> offsets_;
  std::vector<double> state_;
  Resolution last_;
  Rk4Stepper stepper_;
};

}  // namespace spcp
