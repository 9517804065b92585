#pragma once

#include <cmath>
#include <cstddef>
#include <future>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/lti.hpp"
#include "spcp/scenario.hpp"
#include "spcp/sync_controller.hpp"
#include "spcp/trace.hpp"

namespace spcp {

// States or outputs beyond this magnitude are reported as divergence.
inline constexpr double kDivergenceLimit = 1e12;

/// Series connection Y_c -> G_p1 -> Y_1 -> G_p2 -> Y_2 -> ...
class PlantCascade {
 public:
  explicit PlantCascade(const std::vector<RationalTransferFunction>& stages) {
    if (stages.empty()) {
      throw ConfigError("plant cascade needs at least one stage");
    }
    std::size_t offset = 0;
    for (const auto& tf : stages) {
      models_.push_back(realize(tf));
      offsets_.push_back(offset);
      offset += models_.back().order;
    }
    offsets_.push_back(offset);
  }

  std::size_t stage_count() const { return models_.size(); }
  std::size_t state_size() const { return offsets_.back(); }
  std::size_t stage_state_size(std::size_t j) const { return models_[j].order; }
  std::size_t stage_offset(std::size_t j) const { return offsets_[j]; }

  // Outputs with Y_c = 0. Measured outputs have no feedthrough from Y_c, so
  // for them this is already the true value.
  void free_outputs(std::span<const double> x, std::span<double> y) const {
    double in = 0.0;
    for (std::size_t j = 0; j < models_.size(); ++j) {
      in = models_[j].output(stage(x, j), in);
      y[j] = in;
    }
  }

  void outputs(std::span<const double> x, double y_c, std::span<double> y) const {
    double in = y_c;
    for (std::size_t j = 0; j < models_.size(); ++j) {
      in = models_[j].output(stage(x, j), in);
      y[j] = in;
    }
  }

  void derivative(std::span<const double> x, double y_c, std::span<const double> y,
                  std::span<double> dx) const {
    for (std::size_t j = 0; j < models_.size(); ++j) {
      const double in = j == 0 ? y_c : y[j - 1];
      models_[j].derivative(stage(x, j), in, dx.subspan(offsets_[j], models_[j].order));
    }
  }

 private:
  std::span<const double> stage(std::span<const double> x, std::size_t j) const {
    return x.subspan(offsets_[j], models_[j].order);
  }

  std::vector<StateSpaceModel> models_;
  std::vector<std::size_t> offsets_;
};

/// Synced controller and plant cascade integrated as one joint state vector
/// [controller paths..., plant stages...]. Gates are sampled at the start of
/// each step and held across it.
class ClosedLoop {
 public:
  explicit ClosedLoop(const Scenario& scenario)
      : scenario_(scenario),
        controller_((scenario.validate(), scenario.path_configs()), scenario.w_gate,
                    scenario.u_gate),
        plant_(scenario.plants),
        names_(trace_column_names(scenario.paths.size(), scenario.plants.size())) {
    state_.assign(controller_.state_size() + plant_.state_size(), 0.0);
    for (std::size_t i = 0; i < scenario.init_paths.size(); ++i) {
      if (scenario.init_paths[i]) controller_.set_path_state(i, *scenario.init_paths[i]);
    }
    const auto cs = controller_.state();
    std::copy(cs.begin(), cs.end(), state_.begin());
    for (std::size_t j = 0; j < scenario.init_plants.size(); ++j) {
      if (!scenario.init_plants[j]) continue;
      const auto& v = *scenario.init_plants[j];
      std::copy(v.begin(), v.end(),
                state_.begin() +
                    static_cast<std::ptrdiff_t>(controller_.state_size() + plant_.stage_offset(j)));
    }
    resolution_ = controller_.make_resolution();
    measured_.assign(plant_.stage_count(), 0.0);
    outputs_.assign(plant_.stage_count(), 0.0);
  }

  const std::vector<std::string>& column_names() const { return names_; }
  std::span<const double> state() const { return state_; }

  Trace run() {
    const auto& sim = scenario_.sim;
    const std::size_t steps = sim.steps();
    Trace trace(names_);
    trace.reserve(steps / sim.record_stride + 1);
    std::vector<double> row(names_.size(), 0.0);

    record(0.0, row);
    trace.append(row);
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * sim.dt;
      step(t, sim.dt);
      check_state(static_cast<double>(k + 1) * sim.dt);
      if ((k + 1) % sim.record_stride == 0) {
        record(static_cast<double>(k + 1) * sim.dt, row);
        check_row(row);
        trace.append(row);
      }
    }
    return trace;
  }

  // Fills one trace row for the current state at time t.
  void record(double t, std::span<double> row) {
    const GateSet g = controller_.gates_at(t);
    evaluate(g, state_, resolution_, outputs_);
    std::size_t c = 0;
    row[c++] = t;
    row[c++] = resolution_.y_c;
    for (double x : resolution_.outputs) row[c++] = x;
    for (double y : outputs_) row[c++] = y;
    row[c++] = g.w;
    row[c++] = g.u;
    for (std::size_t i = 0; i < resolution_.sync_errors.size(); ++i) {
      if (i != resolution_.active) row[c++] = resolution_.sync_errors[i];
    }
  }

 private:
  void evaluate(const GateSet& g, std::span<const double> x, Resolution& r,
                std::vector<double>& y) {
    const std::size_t nc = controller_.state_size();
    const auto xc = x.first(nc);
    const auto xp = x.subspan(nc);
    plant_.free_outputs(xp, measured_);
    controller_.resolve(g, xc, measured_, r);
    plant_.outputs(xp, r.y_c, y);
  }

  void step(double t, double dt) {
    const GateSet g = controller_.gates_at(t);
    const std::size_t nc = controller_.state_size();
    stepper_.step(
        [&](double, std::span<const double> x, std::span<double> dx) {
          evaluate(g, x, resolution_, outputs_);
          controller_.derivative(x.first(nc), resolution_, dx.first(nc));
          plant_.derivative(x.subspan(nc), resolution_.y_c, outputs_, dx.subspan(nc));
        },
        std::span<double>(state_), t, dt);
  }

  void check_state(double t) {
    for (std::size_t i = 0; i < state_.size(); ++i) {
      if (std::isfinite(state_[i]) && std::abs(state_[i]) <= kDivergenceLimit) continue;
      // Report the first recorded quantity that went bad, else the raw state.
      std::vector<double> row(names_.size(), 0.0);
      record(t, row);
      for (std::size_t c = 1; c < row.size(); ++c) {
        if (!std::isfinite(row[c]) || std::abs(row[c]) > kDivergenceLimit) fail(t, names_[c]);
      }
      fail(t, "state[" + std::to_string(i) + "]");
    }
  }

  void check_row(std::span<const double> row) const {
    for (std::size_t c = 1; c < row.size(); ++c) {
      if (!std::isfinite(row[c]) || std::abs(row[c]) > kDivergenceLimit) fail(row[0], names_[c]);
    }
  }

  [[noreturn]] static void fail(double t, const std::string& column) {
    throw NumericFailure("simulation diverged at t=" + std::to_string(t) + " in column " +
                         column);
  }

  Scenario scenario_;
  SyncedController controller_;
  PlantCascade plant_;
  std::vector<std::string> names_;
  std::vector<double> state_;
  Resolution resolution_;
  std::vector<double> measured_;
  std::vector<double> outputs_;
  Rk4Stepper stepper_;
};

/// Runs the scenario from its initial state and records every
/// `record_stride`-th step, including t = 0. Deterministic.
inline Trace simulate(const Scenario& scenario) {
  ClosedLoop loop(scenario);
  return loop.run();
}

/// The scenario as configured and the same scenario with u = u_bar = 0.
inline std::pair<Trace, Trace> run_comparison(const Scenario& scenario) {
  scenario.validate();
  const Scenario off = without_sync(scenario);
  auto synced = std::async(std::launch::async, [&] { return simulate(scenario); });
  Trace unsynced = simulate(off);
  return {synced.get(), std::move(unsynced)};
}

}  // namespace spcp
