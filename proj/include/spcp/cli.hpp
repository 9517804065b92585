#pragma once

#include <exception>
#include <filesystem>
#include <iostream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "spcp/closed_loop.hpp"
#include "spcp/errors.hpp"
#include "spcp/report.hpp"
#include "spcp/scenario.hpp"
#include "spcp/scenario_io.hpp"
#include "spcp/trace_csv.hpp"

namespace spcp {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitNumeric = 3,
  kExitIo = 4,
};

namespace detail {

struct NamedScenario {
  std::string name;
  Scenario scenario;
};

// "builtin:NAME" or a path to a scenario file.
inline NamedScenario resolve_scenario(const std::string& ref) {
  constexpr std::string_view prefix = "builtin:";
  if (ref.rfind(prefix, 0) == 0) {
    const auto name = ref.substr(prefix.size());
    return {name, builtin_example(name)};
  }
  return {std::filesystem::path(ref).stem().string(), load_scenario_file(ref)};
}

inline std::string one_line(std::string s) {
  for (auto& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

inline std::filesystem::path prepare_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir + "'");
  return dir;
}

inline void write_comparison(const NamedScenario& ns, const std::filesystem::path& dir,
                             std::ostream& out, bool print_report) {
  const auto [synced, unsynced] = run_comparison(ns.scenario);
  const ComparisonReport report{summarize(ns.scenario, synced),
                                summarize(without_sync(ns.scenario), unsynced)};
  const auto text = format_comparison(ns.name, report);
  const auto sync_path = dir / (ns.name + "_sync.csv");
  const auto nosync_path = dir / (ns.name + "_nosync.csv");
  const auto metrics_path = dir / (ns.name + "_metrics.txt");
  write_file_atomic(sync_path, trace_to_csv(synced));
  write_file_atomic(nosync_path, trace_to_csv(unsynced));
  write_file_atomic(metrics_path, text);
  if (print_report) out << text;
  out << "wrote " << sync_path.string() << "\n"
      << "wrote " << nosync_path.string() << "\n"
      << "wrote " << metrics_path.string() << "\n";
}

}  // namespace detail

/// Command-line entry point. Exit codes: 0 success, 2 configuration or
/// validation error, 3 numeric failure, 4 I/O failure. Failures print one
/// `error: <kind>: <reason>` line on `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Synced parallel control paths: closed-loop simulator", "spcp"};
  app.require_subcommand(1);

  std::string scenario_ref;
  std::string out_dir = ".";
  bool no_sync = false;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write its trace CSV");
  run->add_option("scenario", scenario_ref, "scenario file or builtin:NAME")->required();
  run->add_flag("--no-sync", no_sync, "disable the sync loops (u = u_bar = 0)");
  run->add_option("--out", out_dir, "output directory");

  auto* compare = app.add_subcommand("compare", "Run with and without sync loops and score both");
  compare->add_option("scenario", scenario_ref, "scenario file or builtin:NAME")->required();
  compare->add_option("--out", out_dir, "output directory");

  std::string trace_path;
  auto* metrics = app.add_subcommand("metrics", "Score an existing trace CSV");
  metrics->add_option("trace", trace_path, "trace CSV")->required();
  metrics->add_option("--scenario", scenario_ref, "scenario the trace came from")->required();

  auto* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", scenario_ref, "scenario file or builtin:NAME")->required();

  std::string demo_name;
  auto* demo = app.add_subcommand("demo", "Run and compare a built-in example, print the report");
  demo->add_option("name", demo_name, "example1, example2a or example2b")->required();
  demo->add_option("--out", out_dir, "output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: usage: " << detail::one_line(e.what()) << "\n";
    return kExitConfig;
  }

  try {
    if (run->parsed()) {
      auto ns = detail::resolve_scenario(scenario_ref);
      if (no_sync) ns.scenario = without_sync(ns.scenario);
      const auto trace = simulate(ns.scenario);
      const auto dir = detail::prepare_dir(out_dir);
      const auto path = dir / (ns.name + (no_sync ? "_nosync.csv" : "_sync.csv"));
      write_file_atomic(path, trace_to_csv(trace));
      out << "wrote " << path.string() << "\n";
    } else if (compare->parsed()) {
      const auto ns = detail::resolve_scenario(scenario_ref);
      detail::write_comparison(ns, detail::prepare_dir(out_dir), out, false);
    } else if (metrics->parsed()) {
      const auto ns = detail::resolve_scenario(scenario_ref);
      const auto trace = load_trace_csv(trace_path);
      // A trace recorded without sync loops has an all-zero u column.
      const auto& u = trace.has_column("u") ? trace.column("u") : std::vector<double>{};
      const bool unsynced = !u.empty() && std::all_of(u.begin(), u.end(), [](double v) { return v == 0.0; });
      const auto& scenario = unsynced ? without_sync(ns.scenario) : ns.scenario;
      const auto expected = trace_column_names(scenario.paths.size(), scenario.plants.size());
      if (trace.names() != expected) {
        throw ConfigError("trace columns do not match the scenario shape");
      }
      out << format_summary(std::filesystem::path(trace_path).stem().string(),
                            summarize(scenario, trace));
    } else if (validate->parsed()) {
      const auto ns = detail::resolve_scenario(scenario_ref);
      out << "valid: " << ns.name << " (" << ns.scenario.paths.size() << " paths, "
          << ns.scenario.plants.size() << " plant stages)\n";
    } else if (demo->parsed()) {
      const detail::NamedScenario ns{demo_name, builtin_example(demo_name)};
      detail::write_comparison(ns, detail::prepare_dir(out_dir), out, true);
    }
  } catch (const ConfigError& e) {
    err << "error: config: " << detail::one_line(e.what()) << "\n";
    return kExitConfig;
  } catch (const NumericFailure& e) {
    err << "error: numeric: " << detail::one_line(e.what()) << "\n";
    return kExitNumeric;
  } catch (const IoError& e) {
    err << "error: io: " << detail::one_line(e.what()) << "\n";
    return kExitIo;
  }
  return kExitOk;
}

inline int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace spcp
