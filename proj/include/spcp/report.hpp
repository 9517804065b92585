#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "spcp/gating.hpp"
#include "spcp/metrics.hpp"
#include "spcp/number_format.hpp"
#include "spcp/scenario.hpp"
#include "spcp/sync_controller.hpp"
#include "spcp/trace.hpp"

namespace spcp {

// Interval between consecutive w switches, with the path active inside it.
struct Epoch {
  Interval span;
  std::size_t active_path = 0;
  EpochTarget target;
};

inline std::vector<double> switch_times(const Scenario& s, const Trace& trace) {
  if (trace.empty()) return {};
  return transitions_in(s.w_gate, trace.time().front(), trace.time().back());
}

inline std::vector<Epoch> epochs(const Scenario& s, const Trace& trace) {
  std::vector<Epoch> out;
  if (trace.empty()) return out;
  std::vector<double> bounds{trace.time().front()};
  for (double ts : switch_times(s, trace)) bounds.push_back(ts);
  bounds.push_back(trace.time().back());
  for (std::size_t k = 0; k + 1 < bounds.size(); ++k) {
    const GateSet g{gate_value(s.w_gate, bounds[k]), gate_complement(s.w_gate, bounds[k]), 0, 0};
    const std::size_t active = (s.paths.size() == 1 || g.w == 1) ? 0 : 1;
    const auto& p = s.paths[active];
    out.push_back(Epoch{{bounds[k], bounds[k + 1]},
                        active,
                        EpochTarget{"y" + std::to_string(p.measurement_index + 1), p.setpoint}});
  }
  return out;
}

struct RunSummary {
  SwitchBumpReport bumps;
  std::vector<Epoch> epochs;
  std::vector<TrackingReport> tracking;
};

inline RunSummary summarize(const Scenario& s, const Trace& trace) {
  RunSummary r;
  r.epochs = epochs(s, trace);
  const auto switches = switch_times(s, trace);
  std::vector<std::optional<EpochTarget>> targets;
  for (std::size_t k = 1; k < r.epochs.size(); ++k) targets.emplace_back(r.epochs[k].target);
  r.bumps = switch_bumps(trace, switches, s.metrics.window, targets, s.metrics.settling_band);
  for (const auto& e : r.epochs) {
    r.tracking.push_back(tracking_metrics(trace, e.span, e.target.reference, e.target.column));
  }
  return r;
}

struct ComparisonReport {
  RunSummary sync;
  RunSummary nosync;
};

namespace detail {

inline std::string fmt(double v) { return format_double(v); }

inline std::string fmt_opt(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string("none");
}

inline void append_summary_text(std::string& out, const std::string& label, const RunSummary& r) {
  out += label + "\n";
  out += "  switches:\n";
  for (const auto& b : r.bumps.switches) {
    out += "    t=" + fmt(b.time) + "  |dY_c|=" + fmt(b.jump) + " (" + fmt(b.before) + " -> " +
           fmt(b.after) + ", spacing " + fmt(b.sample_spacing) + " s)";
    for (std::size_t k = 0; k < r.bumps.outputs.size(); ++k) {
      out += "  peak " + r.bumps.outputs[k] + "=" + fmt(b.peak_deviation[k]);
    }
    out += "  settling=" + fmt_opt(b.settling_time) + "\n";
  }
  out += "  epochs:\n";
  for (std::size_t k = 0; k < r.epochs.size(); ++k) {
    const auto& e = r.epochs[k];
    const auto& m = r.tracking[k];
    out += "    [" + fmt(e.span.start) + ", " + fmt(e.span.end) + "] path" +
           std::to_string(e.active_path + 1) + " " + e.target.column + "->" +
           fmt(e.target.reference) + "  IAE=" + fmt(m.iae) + "  ITAE=" + fmt(m.itae) +
           "  SSE=" + fmt(m.steady_state_error) + "  osc=" + fmt(m.oscillation_energy) + "\n";
  }
}

inline void append_summary_keys(std::string& out, const std::string& prefix, const RunSummary& r) {
  auto kv = [&](const std::string& key, const std::string& value) {
    out += prefix + key + "=" + value + "\n";
  };
  kv("switch_count", std::to_string(r.bumps.switches.size()));
  kv("max_jump", fmt(r.bumps.max_jump()));
  for (const auto& name : r.bumps.outputs) kv("max_peak_" + name, fmt(r.bumps.max_peak(name)));
  for (std::size_t k = 0; k < r.bumps.switches.size(); ++k) {
    const auto& b = r.bumps.switches[k];
    const auto p = "switch" + std::to_string(k + 1) + ".";
    kv(p + "t", fmt(b.time));
    kv(p + "jump", fmt(b.jump));
    for (std::size_t j = 0; j < r.bumps.outputs.size(); ++j) {
      kv(p + "peak_" + r.bumps.outputs[j], fmt(b.peak_deviation[j]));
    }
    kv(p + "settling", fmt_opt(b.settling_time));
  }
  for (std::size_t k = 0; k < r.epochs.size(); ++k) {
    const auto p = "epoch" + std::to_string(k + 1) + ".";
    const auto& m = r.tracking[k];
    kv(p + "start", fmt(r.epochs[k].span.start));
    kv(p + "end", fmt(r.epochs[k].span.end));
    kv(p + "path", std::to_string(r.epochs[k].active_path + 1));
    kv(p + "iae", fmt(m.iae));
    kv(p + "itae", fmt(m.itae));
    kv(p + "sse", fmt(m.steady_state_error));
    kv(p + "osc", fmt(m.oscillation_energy));
  }
}

}  // namespace detail

/// Human-readable block followed by `key=value` lines for one run.
inline std::string format_summary(const std::string& name, const RunSummary& r) {
  std::string out = "# metrics for " + name + "\n";
  detail::append_summary_text(out, name, r);
  out += "\n";
  detail::append_summary_keys(out, "", r);
  return out;
}

/// Synced vs unsynced report: readable tables, then `key=value` lines
/// prefixed `sync.` / `nosync.`.
inline std::string format_comparison(const std::string& name, const ComparisonReport& c) {
  std::string out = "# sync-on vs sync-off comparison for " + name + "\n";
  detail::append_summary_text(out, "with sync loops", c.sync);
  detail::append_summary_text(out, "without sync loops (u = u_bar = 0)", c.nosync);
  out += "\n";
  out += "scenario=" + name + "\n";
  detail::append_summary_keys(out, "sync.", c.sync);
  detail::append_summary_keys(out, "nosync.", c.nosync);
  return out;
}

}  // namespace spcp
