#pragma once

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/number_format.hpp"
#include "spcp/scenario.hpp"

// Scenario files are flat `section.key = value` assignments, one per line.
// Lists are comma separated, `#` starts a comment. Sections:
//
//   plantN.num, plantN.den          ascending coefficients of stage N
//   pathN.setpoint, pathN.measurement (1-based stage index)
//   pathN.kp + pathN.ki  or  pathN.num + pathN.den
//   pathN.sync_error_gain, pathN.augment             (optional)
//   w_gate.period, w_gate.active_fraction, w_gate.phase, w_gate.enabled
//   u_gate.*                                         (each defaults to w_gate)
//   sim.dt, sim.t_end, sim.record_stride
//   metrics.window, metrics.settling_band            (optional)
//   init.pathN, init.plantN                          (optional state lists)
//
// See docs/scenario-format.md for the full grammar.

namespace spcp {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

// Splits "path12" into ("path", 12); index 0 when there is no numeric suffix.
inline std::pair<std::string, std::size_t> split_indexed(std::string_view name) {
  std::size_t digits = name.size();
  while (digits > 0 && name[digits - 1] >= '0' && name[digits - 1] <= '9') --digits;
  if (digits == name.size() || name[digits] == '0') return {std::string(name), 0};
  std::size_t idx = 0;
  for (std::size_t i = digits; i < name.size(); ++i) {
    idx = idx * 10 + static_cast<std::size_t>(name[i] - '0');
    if (idx > 100000) return {std::string(name), 0};
  }
  return {std::string(name.substr(0, digits)), idx};
}

class ScenarioReader {
 public:
  explicit ScenarioReader(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                             : nl - pos);
      pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
      ++line_no;
      if (const auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        fail(line_no, "expected 'section.key = value'");
      }
      const std::string key(trim(line.substr(0, eq)));
      const std::string value(trim(line.substr(eq + 1)));
      check_known(key, line_no);
      if (entries_.count(key)) {
        fail(line_no, "duplicate key '" + key + "' (first set on line " +
                          std::to_string(entries_[key].line) + ")");
      }
      entries_[key] = Entry{value, line_no};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  int line_of(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  std::size_t max_index(const std::string& section) const { return max_index_.count(section) ? max_index_.at(section) : 0; }

  void require(const std::string& key) {
    if (!has(key)) missing_.push_back(key);
  }

  std::optional<double> number(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    const auto v = parse_double(e.value);
    if (!v) fail(e.line, key + ": malformed number '" + e.value + "'");
    return v;
  }

  double number_or(const std::string& key, double fallback) {
    return number(key).value_or(fallback);
  }

  std::optional<std::size_t> positive_integer(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    std::size_t v = 0;
    const auto* b = e.value.data();
    const auto* end = b + e.value.size();
    const auto res = std::from_chars(b, end, v);
    if (res.ec != std::errc{} || res.ptr != end || v == 0) {
      fail(e.line, key + ": expected a positive integer, got '" + e.value + "'");
    }
    return v;
  }

  std::optional<bool> boolean(const std::string& key) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    if (e.value == "true") return true;
    if (e.value == "false") return false;
    fail(e.line, key + ": expected true or false, got '" + e.value + "'");
  }

  std::optional<std::vector<double>> list(const std::string& key, bool allow_empty = false) {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    std::vector<double> out;
    if (e.value.empty()) {
      if (!allow_empty) fail(e.line, key + ": empty list");
      return out;
    }
    std::string_view rest = e.value;
    while (true) {
      const auto comma = rest.find(',');
      const auto item = trim(rest.substr(0, comma));
      const auto v = parse_double(item);
      if (!v) fail(e.line, key + ": malformed number '" + std::string(item) + "'");
      out.push_back(*v);
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  [[noreturn]] void fail_at(const std::string& key, const std::string& msg) const {
    fail(line_of(key), msg);
  }

  void throw_if_missing() const {
    if (missing_.empty()) return;
    std::string msg = "missing required key(s): ";
    for (std::size_t i = 0; i < missing_.size(); ++i) msg += (i ? ", " : "") + missing_[i];
    throw ConfigError(msg);
  }

  // Prefixes a validation message with the line of the longest key it names.
  [[noreturn]] void rethrow_located(const ConfigError& err) const {
    const std::string what = err.what();
    const Entry* best = nullptr;
    std::size_t best_len = 0;
    for (const auto& [key, entry] : entries_) {
      if (key.size() > best_len && what.find(key) != std::string::npos) {
        best = &entry;
        best_len = key.size();
      }
    }
    if (best) fail(best->line, what);
    throw err;
  }

 private:
  struct Entry {
    std::string value;
    int line = 0;
  };

  [[noreturn]] static void fail(int line, const std::string& msg) {
    if (line > 0) throw ConfigError("line " + std::to_string(line) + ": " + msg);
    throw ConfigError(msg);
  }

  void check_known(const std::string& key, int line) {
    static const std::map<std::string, std::set<std::string>> fixed = {
        {"w_gate", {"period", "active_fraction", "phase", "enabled"}},
        {"u_gate", {"period", "active_fraction", "phase", "enabled"}},
        {"sim", {"dt", "t_end", "record_stride"}},
        {"metrics", {"window", "settling_band"}},
    };
    static const std::map<std::string, std::set<std::string>> indexed = {
        {"plant", {"num", "den"}},
        {"path",
         {"setpoint", "measurement", "kp", "ki", "num", "den", "sync_error_gain", "augment"}},
    };
    const auto dot = key.find('.');
    if (dot != std::string::npos && key.find('.', dot + 1) == std::string::npos) {
      const std::string section = key.substr(0, dot);
      const std::string field = key.substr(dot + 1);
      if (const auto it = fixed.find(section); it != fixed.end() && it->second.count(field)) {
        return;
      }
      const auto [base, idx] = split_indexed(section);
      if (idx > 0) {
        if (const auto it = indexed.find(base); it != indexed.end() && it->second.count(field)) {
          max_index_[base] = std::max(max_index_[base], idx);
          return;
        }
      }
      if (section == "init") {
        const auto [fbase, fidx] = split_indexed(field);
        if (fidx > 0 && (fbase == "path" || fbase == "plant")) {
          max_index_["init." + fbase] = std::max(max_index_["init." + fbase], fidx);
          return;
        }
      }
    }
    fail(line, "unknown key '" + key + "'");
  }

  std::map<std::string, Entry> entries_;
  std::map<std::string, std::size_t> max_index_;
  std::vector<std::string> missing_;
};

}  // namespace detail

/// Parses and validates a scenario. Unknown keys, duplicates, malformed
/// values and missing required keys are rejected with line-numbered
/// diagnostics where a line exists.
inline Scenario parse_scenario(std::string_view text) {
  detail::ScenarioReader in(text);
  Scenario s;

  const std::size_t stages = std::max<std::size_t>(in.max_index("plant"), 1);
  const std::size_t paths = std::max<std::size_t>(in.max_index("path"), 1);

  for (std::size_t j = 1; j <= stages; ++j) {
    const auto p = "plant" + std::to_string(j);
    in.require(p + ".num");
    in.require(p + ".den");
  }
  for (std::size_t i = 1; i <= paths; ++i) {
    const auto p = "path" + std::to_string(i);
    in.require(p + ".setpoint");
    in.require(p + ".measurement");
    const bool pi = in.has(p + ".kp") || in.has(p + ".ki");
    const bool tf = in.has(p + ".num") || in.has(p + ".den");
    if (pi && tf) {
      in.fail_at(in.has(p + ".num") ? p + ".num" : p + ".den",
                 p + ": give either kp/ki or num/den, not both");
    }
    if (tf) {
      in.require(p + ".num");
      in.require(p + ".den");
    } else {
      in.require(p + ".kp");
      in.require(p + ".ki");
    }
  }
  in.require("w_gate.period");
  in.require("w_gate.active_fraction");
  in.require("sim.dt");
  in.require("sim.t_end");
  in.throw_if_missing();

  auto build_tf = [&](const std::string& prefix) {
    const auto num = *in.list(prefix + ".num");
    const auto den = *in.list(prefix + ".den");
    try {
      return RationalTransferFunction(num, den);
    } catch (const ConfigError& e) {
      in.fail_at(prefix + ".num", prefix + ": " + e.what());
    }
  };

  for (std::size_t j = 1; j <= stages; ++j) {
    s.plants.push_back(build_tf("plant" + std::to_string(j)));
  }
  for (std::size_t i = 1; i <= paths; ++i) {
    const auto p = "path" + std::to_string(i);
    PathSpec spec;
    spec.setpoint = *in.number(p + ".setpoint");
    spec.measurement_index = *in.positive_integer(p + ".measurement") - 1;
    if (in.has(p + ".kp")) {
      spec.controller = PIParams{*in.number(p + ".kp"), *in.number(p + ".ki")};
      if (std::get<PIParams>(spec.controller).ki < 0.0) {
        in.fail_at(p + ".ki", p + ".ki must be >= 0");
      }
    } else {
      spec.controller = build_tf(p);
    }
    spec.sync_error_gain = in.number_or(p + ".sync_error_gain", 1.0);
    spec.augment = in.boolean(p + ".augment").value_or(false);
    s.paths.push_back(spec);
  }

  auto read_gate = [&](const std::string& name, const GateSchedule& fallback) {
    GateSchedule g;
    g.period = in.number_or(name + ".period", fallback.period);
    g.active_fraction = in.number_or(name + ".active_fraction", fallback.active_fraction);
    g.phase = in.number_or(name + ".phase", fallback.phase);
    g.enabled = in.boolean(name + ".enabled").value_or(fallback.enabled);
    if (!(g.active_fraction >= 0.0 && g.active_fraction <= 1.0)) {
      in.fail_at(name + ".active_fraction", name + ".active_fraction = " +
                                                format_double(g.active_fraction) +
                                                " is outside [0, 1]");
    }
    return g;
  };
  s.w_gate = read_gate("w_gate", GateSchedule{1.0, 1.0, 0.0, true});
  s.u_gate = read_gate("u_gate", s.w_gate);

  s.sim.dt = *in.number("sim.dt");
  s.sim.t_end = *in.number("sim.t_end");
  s.sim.record_stride = in.positive_integer("sim.record_stride").value_or(10);
  s.metrics.window = in.number_or("metrics.window", 5.0);
  s.metrics.settling_band = in.number_or("metrics.settling_band", 0.02);

  if (in.max_index("init.path") > paths) {
    in.fail_at("init.path" + std::to_string(in.max_index("init.path")),
               "init override for a path that does not exist");
  }
  if (in.max_index("init.plant") > stages) {
    in.fail_at("init.plant" + std::to_string(in.max_index("init.plant")),
               "init override for a plant stage that does not exist");
  }
  s.init_paths.resize(paths);
  s.init_plants.resize(stages);
  for (std::size_t i = 1; i <= paths; ++i) {
    s.init_paths[i - 1] = in.list("init.path" + std::to_string(i), true);
  }
  for (std::size_t j = 1; j <= stages; ++j) {
    s.init_plants[j - 1] = in.list("init.plant" + std::to_string(j), true);
  }

  try {
    s.validate();
  } catch (const ConfigError& e) {
    in.rethrow_located(e);
  }
  return s;
}

/// Canonical text form; every key is written so the result parses back to an
/// equal scenario.
inline std::string serialize_scenario(const Scenario& s) {
  std::string out;
  auto line = [&](const std::string& key, const std::string& value) {
    out += key;
    out += " = ";
    out += value;
    out += '\n';
  };
  auto list = [](const std::vector<double>& v) {
    std::string r;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) r += ", ";
      append_double(r, v[i]);
    }
    return r;
  };
  auto boolean = [](bool b) { return std::string(b ? "true" : "false"); };

  out += "# plant cascade, coefficients in ascending powers of s\n";
  for (std::size_t j = 0; j < s.plants.size(); ++j) {
    const auto p = "plant" + std::to_string(j + 1);
    line(p + ".num", list(s.plants[j].num()));
    line(p + ".den", list(s.plants[j].den()));
  }
  out += "\n# control paths\n";
  for (std::size_t i = 0; i < s.paths.size(); ++i) {
    const auto p = "path" + std::to_string(i + 1);
    const auto& spec = s.paths[i];
    line(p + ".setpoint", format_double(spec.setpoint));
    line(p + ".measurement", std::to_string(spec.measurement_index + 1));
    if (const auto* pi = std::get_if<PIParams>(&spec.controller)) {
      line(p + ".kp", format_double(pi->kp));
      line(p + ".ki", format_double(pi->ki));
    } else {
      const auto& tf = std::get<RationalTransferFunction>(spec.controller);
      line(p + ".num", list(tf.num()));
      line(p + ".den", list(tf.den()));
    }
    line(p + ".sync_error_gain", format_double(spec.sync_error_gain));
    line(p + ".augment", boolean(spec.augment));
  }
  for (const auto& [name, g] : {std::pair<std::string, const GateSchedule&>{"w_gate", s.w_gate},
                                {"u_gate", s.u_gate}}) {
    out += "\n";
    line(name + ".period", format_double(g.period));
    line(name + ".active_fraction", format_double(g.active_fraction));
    line(name + ".phase", format_double(g.phase));
    line(name + ".enabled", boolean(g.enabled));
  }
  out += "\n";
  line("sim.dt", format_double(s.sim.dt));
  line("sim.t_end", format_double(s.sim.t_end));
  line("sim.record_stride", std::to_string(s.sim.record_stride));
  line("metrics.window", format_double(s.metrics.window));
  line("metrics.settling_band", format_double(s.metrics.settling_band));
  for (std::size_t i = 0; i < s.init_paths.size(); ++i) {
    if (s.init_paths[i]) line("init.path" + std::to_string(i + 1), list(*s.init_paths[i]));
  }
  for (std::size_t j = 0; j < s.init_plants.size(); ++j) {
    if (s.init_plants[j]) line("init.plant" + std::to_string(j + 1), list(*s.init_plants[j]));
  }
  return out;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read scenario file '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace spcp
