#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/trace.hpp"

namespace spcp {

struct Interval {
  double start = 0.0;
  double end = 0.0;
  double length() const { return end - start; }
};

// What an epoch is supposed to regulate: a trace column and its reference.
struct EpochTarget {
  std::string column;
  double reference = 0.0;
};

struct SwitchBump {
  double time = 0.0;
  double before = 0.0;  // y_c at the last sample before the switch
  double after = 0.0;   // y_c at the first sample at or after the switch
  double jump = 0.0;
  double sample_spacing = 0.0;
  // Per plant output (same order as SwitchBumpReport::outputs): largest
  // |y - pre-switch 1 s mean| over [t_s, t_s + window].
  std::vector<double> peak_deviation;
  // Time from the switch until the target stays inside its band, when a
  // target was given and the epoch settles.
  std::optional<double> settling_time;
};

struct SwitchBumpReport {
  std::vector<std::string> outputs;
  std::vector<SwitchBump> switches;

  double max_jump() const {
    double m = 0.0;
    for (const auto& s : switches) m = std::max(m, s.jump);
    return m;
  }

  double max_peak(std::string_view output) const {
    const auto it = std::find(outputs.begin(), outputs.end(), output);
    if (it == outputs.end()) {
      throw ConfigError("switch report: unknown output '" + std::string(output) + "'");
    }
    const auto k = static_cast<std::size_t>(it - outputs.begin());
    double m = 0.0;
    for (const auto& s : switches) m = std::max(m, s.peak_deviation[k]);
    return m;
  }
};

struct TrackingReport {
  double iae = 0.0;
  double itae = 0.0;
  double steady_state_error = 0.0;  // mean |ref - y| over the final 20% of the epoch
  double oscillation_energy = 0.0;  // residual variance after a least-squares line, final 50%
};

namespace detail {

inline bool is_plant_output(const std::string& name) {
  return name.size() > 1 && name[0] == 'y' &&
         std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

inline double time_tolerance(double t) { return 1e-9 * std::max(1.0, std::abs(t)); }

// First sample index with time >= t (within tolerance).
inline std::size_t first_at_or_after(const std::vector<double>& time, double t) {
  const double tol = time_tolerance(t);
  return static_cast<std::size_t>(
      std::lower_bound(time.begin(), time.end(), t - tol) - time.begin());
}

}  // namespace detail

/// Earliest time after `epoch.start` from which `column` stays within
/// band * |reference| of the reference until the epoch ends.
inline std::optional<double> settling_time(const Trace& trace, Interval epoch,
                                           const EpochTarget& target, double band) {
  const auto& t = trace.time();
  const auto& y = trace.column(target.column);
  const double half_width = band * std::max(std::abs(target.reference), 1e-12);
  const std::size_t first = detail::first_at_or_after(t, epoch.start);
  const std::size_t last = detail::first_at_or_after(t, epoch.end);
  if (first >= last) return std::nullopt;
  std::size_t settled = first;
  for (std::size_t i = first; i < last; ++i) {
    if (std::abs(y[i] - target.reference) > half_width) settled = i + 1;
  }
  if (settled >= last) return std::nullopt;
  return t[settled] - epoch.start;
}

/// Switch-instant bumps of y_c and post-switch excursions of every plant
/// output. Jumps are taken from the recorded samples straddling each switch,
/// so a continuous signal still shows |slope| * sample spacing.
///
/// `targets`, when non-empty, gives one optional target per switch for the
/// epoch it starts; that epoch runs to the next switch or the end of the trace.
inline SwitchBumpReport switch_bumps(const Trace& trace, std::span<const double> switch_times,
                                     double window,
                                     std::span<const std::optional<EpochTarget>> targets = {},
                                     double settling_band = 0.02) {
  if (trace.empty()) {
    throw ConfigError("switch_bumps: empty trace");
  }
  if (!(window > 0.0)) {
    throw ConfigError("switch_bumps: window must be positive");
  }
  if (!targets.empty() && targets.size() != switch_times.size()) {
    throw ConfigError("switch_bumps: one target per switch expected");
  }
  SwitchBumpReport report;
  std::vector<std::size_t> output_cols;
  for (std::size_t c = 0; c < trace.column_count(); ++c) {
    if (detail::is_plant_output(trace.names()[c])) {
      report.outputs.push_back(trace.names()[c]);
      output_cols.push_back(c);
    }
  }
  const auto& t = trace.time();
  const auto& y_c = trace.column("y_c");

  for (std::size_t k = 0; k < switch_times.size(); ++k) {
    const double ts = switch_times[k];
    const std::size_t after = detail::first_at_or_after(t, ts);
    if (after == 0 || after >= t.size()) {
      throw ConfigError("switch_bumps: switch at t=" + std::to_string(ts) +
                        " is outside the trace interior");
    }
    SwitchBump b;
    b.time = ts;
    b.before = y_c[after - 1];
    b.after = y_c[after];
    b.jump = std::abs(b.after - b.before);
    b.sample_spacing = t[after] - t[after - 1];

    const std::size_t mean_begin = detail::first_at_or_after(t, ts - 1.0);
    const std::size_t window_end = detail::first_at_or_after(t, ts + window + detail::time_tolerance(ts + window) * 2);
    for (const std::size_t c : output_cols) {
      const auto& y = trace.column(c);
      double mean = 0.0;
      for (std::size_t i = mean_begin; i < after; ++i) mean += y[i];
      mean /= static_cast<double>(after - mean_begin);
      double peak = 0.0;
      for (std::size_t i = after; i < window_end; ++i) peak = std::max(peak, std::abs(y[i] - mean));
      b.peak_deviation.push_back(peak);
    }
    if (!targets.empty() && targets[k]) {
      const double epoch_end = k + 1 < switch_times.size() ? switch_times[k + 1] : t.back() + 1.0;
      b.settling_time = settling_time(trace, {ts, epoch_end}, *targets[k], settling_band);
    }
    report.switches.push_back(std::move(b));
  }
  return report;
}

/// Integral error measures of one column against a constant reference over
/// the closed interval `epoch`. Integrals use the trapezoidal rule on the
/// recorded grid; ITAE weights by time since the epoch start.
inline TrackingReport tracking_metrics(const Trace& trace, Interval epoch, double reference,
                                       std::string_view column) {
  const auto& y = trace.column(column);
  if (!(epoch.length() > 0.0)) {
    throw ConfigError("tracking_metrics: epoch length must be positive");
  }
  const auto& t = trace.time();
  const std::size_t first = detail::first_at_or_after(t, epoch.start);
  std::size_t last = detail::first_at_or_after(t, epoch.end);
  if (last < t.size() && std::abs(t[last] - epoch.end) <= detail::time_tolerance(epoch.end)) {
    ++last;
  }
  if (last < first + 2) {
    throw ConfigError("tracking_metrics: epoch covers fewer than two samples");
  }

  TrackingReport r;
  for (std::size_t i = first; i + 1 < last; ++i) {
    const double h = t[i + 1] - t[i];
    const double e0 = std::abs(reference - y[i]);
    const double e1 = std::abs(reference - y[i + 1]);
    r.iae += 0.5 * h * (e0 + e1);
    r.itae += 0.5 * h * ((t[i] - epoch.start) * e0 + (t[i + 1] - epoch.start) * e1);
  }

  const double sse_from = epoch.end - 0.2 * epoch.length();
  std::size_t n = 0;
  for (std::size_t i = first; i < last; ++i) {
    if (t[i] >= sse_from - detail::time_tolerance(sse_from)) {
      r.steady_state_error += std::abs(reference - y[i]);
      ++n;
    }
  }
  if (n > 0) r.steady_state_error /= static_cast<double>(n);

  // Least-squares line through the final half, values shifted for conditioning.
  const double osc_from = epoch.end - 0.5 * epoch.length();
  const std::size_t osc_first = detail::first_at_or_after(t, osc_from);
  const std::size_t m = last - std::max(osc_first, first);
  if (m >= 2) {
    const std::size_t b = last - m;
    const double t0 = t[b];
    const double y0 = y[b];
    double mt = 0.0, my = 0.0;
    for (std::size_t i = b; i < last; ++i) {
      mt += t[i] - t0;
      my += y[i] - y0;
    }
    mt /= static_cast<double>(m);
    my /= static_cast<double>(m);
    double stt = 0.0, sty = 0.0;
    for (std::size_t i = b; i < last; ++i) {
      const double dt = t[i] - t0 - mt;
      stt += dt * dt;
      sty += dt * (y[i] - y0 - my);
    }
    const double slope = stt > 0.0 ? sty / stt : 0.0;
    double ss = 0.0;
    for (std::size_t i = b; i < last; ++i) {
      const double res = (y[i] - y0 - my) - slope * (t[i] - t0 - mt);
      ss += res * res;
    }
    r.oscillation_energy = ss / static_cast<double>(m);
  }
  return r;
}

}  // namespace spcp
