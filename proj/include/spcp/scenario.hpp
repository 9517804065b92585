#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/gating.hpp"
#include "spcp/lti.hpp"
#include "spcp/sync_controller.hpp"

namespace spcp {

using ControllerSpec = std::variant<PIParams, RationalTransferFunction>;

inline RationalTransferFunction controller_transfer_function(const ControllerSpec& spec) {
  if (const auto* pi = std::get_if<PIParams>(&spec)) {
    return pi->to_transfer_function();
  }
  return std::get<RationalTransferFunction>(spec);
}

struct PathSpec {
  double setpoint = 0.0;
  ControllerSpec controller = PIParams{};
  std::size_t measurement_index = 0;  // 0-based index into the plant cascade outputs
  double sync_error_gain = 1.0;
  bool augment = false;

  PathConfig to_config() const {
    PathConfig p;
    p.setpoint = setpoint;
    p.controller = controller_transfer_function(controller);
    p.measurement_index = measurement_index;
    p.sync_error_gain = sync_error_gain;
    return augment ? augment_integrator(p) : p;
  }

  friend bool operator==(const PathSpec&, const PathSpec&) = default;
};

struct SimConfig {
  double dt = 1e-3;
  double t_end = 200.0;
  std::size_t record_stride = 10;

  std::size_t steps() const { return static_cast<std::size_t>(std::llround(t_end / dt)); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct MetricsConfig {
  double window = 5.0;          // s, post-switch peak-deviation window
  double settling_band = 0.02;  // fraction of the epoch reference

  friend bool operator==(const MetricsConfig&, const MetricsConfig&) = default;
};

/// Complete description of one closed-loop experiment.
///
/// The plant is a cascade: stage 1 is driven by the controller output Y_c and
/// stage j by the output of stage j - 1. Initial-state overrides are indexed
/// like `paths` and `plants`; an empty optional means a zero initial state.
struct Scenario {
  std::vector<RationalTransferFunction> plants;
  std::vector<PathSpec> paths;
  GateSchedule w_gate{50.0, 0.7, 0.0, true};
  GateSchedule u_gate{50.0, 0.7, 0.0, true};
  SimConfig sim;
  MetricsConfig metrics;
  std::vector<std::optional<std::vector<double>>> init_paths;
  std::vector<std::optional<std::vector<double>>> init_plants;

  std::vector<PathConfig> path_configs() const {
    std::vector<PathConfig> out;
    out.reserve(paths.size());
    for (const auto& p : paths) out.push_back(p.to_config());
    return out;
  }

  void validate() const;

  const std::optional<std::vector<double>>& init_path(std::size_t i) const {
    static const std::optional<std::vector<double>> none;
    return i < init_paths.size() ? init_paths[i] : none;
  }
  const std::optional<std::vector<double>>& init_plant(std::size_t j) const {
    static const std::optional<std::vector<double>> none;
    return j < init_plants.size() ? init_plants[j] : none;
  }

  // An absent override list equals a list of empty overrides.
  friend bool operator==(const Scenario& a, const Scenario& b) {
    if (a.plants != b.plants || a.paths != b.paths || a.w_gate != b.w_gate ||
        a.u_gate != b.u_gate || a.sim != b.sim || a.metrics != b.metrics) {
      return false;
    }
    for (std::size_t i = 0; i < std::max(a.init_paths.size(), b.init_paths.size()); ++i) {
      if (a.init_path(i) != b.init_path(i)) return false;
    }
    for (std::size_t j = 0; j < std::max(a.init_plants.size(), b.init_plants.size()); ++j) {
      if (a.init_plant(j) != b.init_plant(j)) return false;
    }
    return true;
  }
};

namespace detail {

inline void require_on_grid(double value, double dt, const std::string& what) {
  const double k = std::round(value / dt);
  if (std::abs(value - k * dt) > 1e-9) {
    throw ConfigError(what + " = " + std::to_string(value) +
                      " is not a multiple of sim.dt = " + std::to_string(dt) +
                      " (switch instants must land on the step grid)");
  }
}

inline void require_gate_on_grid(const GateSchedule& g, double dt, const std::string& name) {
  if (!g.enabled || g.active_fraction <= 0.0 || g.active_fraction >= 1.0) return;
  require_on_grid(g.period, dt, name + ".period");
  require_on_grid(g.active_duration(), dt, name + ".active_fraction * " + name + ".period");
  require_on_grid(g.phase, dt, name + ".phase");
}

}  // namespace detail

inline void Scenario::validate() const {
  if (plants.empty()) {
    throw ConfigError("scenario: at least one plant stage (plant1) is required");
  }
  if (paths.empty()) {
    throw ConfigError("scenario: at least one control path (path1) is required");
  }

  // Feedthrough from Y_c to each cascade output.
  std::vector<double> feedthrough;
  double beta = 1.0;
  for (const auto& stage : plants) {
    beta *= realize(stage).d;
    feedthrough.push_back(beta);
  }

  for (std::size_t i = 0; i < paths.size(); ++i) {
    const auto name = "path" + std::to_string(i + 1);
    const auto& p = paths[i];
    if (p.measurement_index >= plants.size()) {
      throw ConfigError(name + ".measurement = " + std::to_string(p.measurement_index + 1) +
                        " but the plant has " + std::to_string(plants.size()) + " stage(s)");
    }
    if (feedthrough[p.measurement_index] != 0.0) {
      throw ConfigError(name + ": measured output y" + std::to_string(p.measurement_index + 1) +
                        " has direct feedthrough from y_c (algebraic loop through the plant)");
    }
    if (!std::isfinite(p.setpoint)) {
      throw ConfigError(name + ".setpoint must be finite");
    }
    if (!(p.sync_error_gain > 0.0) || !std::isfinite(p.sync_error_gain)) {
      throw ConfigError(name + ".sync_error_gain must be positive and finite");
    }
    (void)controller_transfer_function(p.controller);
  }

  w_gate.validate("w_gate");
  u_gate.validate("u_gate");
  if (!w_gate.enabled) {
    throw ConfigError("w_gate.enabled must be true: a main path must always exist");
  }

  if (!(sim.dt > 0.0) || !std::isfinite(sim.dt)) {
    throw ConfigError("sim.dt must be positive and finite");
  }
  if (!(sim.t_end >= sim.dt) || !std::isfinite(sim.t_end)) {
    throw ConfigError("sim.t_end must be finite and at least sim.dt");
  }
  if (sim.t_end / sim.dt > 1e12) {
    throw ConfigError("sim.t_end / sim.dt is too large");
  }
  if (sim.record_stride == 0) {
    throw ConfigError("sim.record_stride must be a positive integer");
  }
  detail::require_on_grid(sim.t_end, sim.dt, "sim.t_end");
  detail::require_gate_on_grid(w_gate, sim.dt, "w_gate");
  detail::require_gate_on_grid(u_gate, sim.dt, "u_gate");

  if (!(metrics.window > 0.0) || !(metrics.settling_band > 0.0)) {
    throw ConfigError("metrics.window and metrics.settling_band must be positive");
  }

  // Building the controller checks the sync loops for singularity.
  const SyncedController controller(path_configs(), w_gate, u_gate);

  if (!init_paths.empty() && init_paths.size() != paths.size()) {
    throw ConfigError("init: path override list does not match the path count");
  }
  for (std::size_t i = 0; i < init_paths.size(); ++i) {
    if (init_paths[i] && init_paths[i]->size() != controller.path_state_size(i)) {
      throw ConfigError("init.path" + std::to_string(i + 1) + " expects " +
                        std::to_string(controller.path_state_size(i)) + " value(s)");
    }
  }
  if (!init_plants.empty() && init_plants.size() != plants.size()) {
    throw ConfigError("init: plant override list does not match the stage count");
  }
  for (std::size_t j = 0; j < init_plants.size(); ++j) {
    if (init_plants[j] && init_plants[j]->size() != plants[j].order()) {
      throw ConfigError("init.plant" + std::to_string(j + 1) + " expects " +
                        std::to_string(plants[j].order()) + " value(s)");
    }
  }
}

inline std::vector<std::string> builtin_names() { return {"example1", "example2a", "example2b"}; }

/// Built-in reproductions of the two worked examples.
///
/// example1: G_p1 = 2/(s^2+4s+12), G_p2 = 2/(s+4), PI(2,10) on y1 = 100,
/// PI(3,18) on y2 = 50, T = 50 s, Tw/T = 0.7.
/// example2a: example1 with G_p2 = 4/(s+4).
/// example2b: example2a with the second controller PI(3,6).
inline Scenario builtin_example(std::string_view name) {
  Scenario s;
  s.plants = {RationalTransferFunction({2.0}, {12.0, 4.0, 1.0}),
              RationalTransferFunction({2.0}, {4.0, 1.0})};
  s.paths = {PathSpec{100.0, PIParams{2.0, 10.0}, 0, 1.0, false},
             PathSpec{50.0, PIParams{3.0, 18.0}, 1, 1.0, false}};
  s.w_gate = GateSchedule{50.0, 0.7, 0.0, true};
  s.u_gate = s.w_gate;
  if (name == "example1") return s;

  s.plants[1] = RationalTransferFunction({4.0}, {4.0, 1.0});
  if (name == "example2a") return s;

  s.paths[1].controller = PIParams{3.0, 6.0};
  if (name == "example2b") return s;

  std::string valid;
  for (const auto& n : builtin_names()) valid += (valid.empty() ? "" : ", ") + n;
  throw ConfigError("unknown builtin scenario '" + std::string(name) + "' (valid: " + valid + ")");
}

/// The same scenario with the synchronization loops switched off
/// (u = u_bar = 0); w is untouched.
inline Scenario without_sync(Scenario s) {
  s.u_gate.enabled = false;
  return s;
}

}  // namespace spcp
