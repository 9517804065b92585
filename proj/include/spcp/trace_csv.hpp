#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spcp/errors.hpp"
#include "spcp/number_format.hpp"
#include "spcp/trace.hpp"

namespace spcp {

// Header row, then one row per sample; shortest round-trip decimals, '\n'
// line endings.
inline std::string trace_to_csv(const Trace& trace) {
  std::string out;
  const auto& names = trace.names();
  for (std::size_t c = 0; c < names.size(); ++c) {
    if (c) out += ',';
    out += names[c];
  }
  out += '\n';
  out.reserve(out.size() + trace.rows() * names.size() * 12);
  for (std::size_t r = 0; r < trace.rows(); ++r) {
    for (std::size_t c = 0; c < names.size(); ++c) {
      if (c) out += ',';
      append_double(out, trace.column(c)[r]);
    }
    out += '\n';
  }
  return out;
}

inline void emit_trace_csv(const Trace& trace, std::ostream& out) {
  const auto text = trace_to_csv(trace);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) {
    throw IoError("failed to write trace CSV");
  }
}

inline Trace parse_trace_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const auto end = nl == std::string_view::npos ? text.size() : nl;
    auto line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
    pos = end + 1;
  }
  if (lines.empty()) {
    throw ConfigError("trace CSV is empty");
  }
  auto split = [](std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t p = 0;
    while (true) {
      const auto comma = line.find(',', p);
      cells.push_back(line.substr(p, comma == std::string_view::npos ? std::string_view::npos
                                                                      : comma - p));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    return cells;
  };
  std::vector<std::string> names;
  for (auto cell : split(lines[0])) names.emplace_back(cell);
  Trace trace(names);
  std::vector<double> row(names.size());
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r]);
    if (cells.size() != names.size()) {
      throw ConfigError("trace CSV line " + std::to_string(r + 1) + ": expected " +
                        std::to_string(names.size()) + " values");
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto v = parse_double(cells[c]);
      if (!v) {
        throw ConfigError("trace CSV line " + std::to_string(r + 1) + ": malformed number '" +
                          std::string(cells[c]) + "'");
      }
      row[c] = *v;
    }
    trace.append(row);
  }
  return trace;
}

inline Trace load_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot read trace '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_trace_csv(buf.str());
}

/// Writes `contents` to a sibling temporary file and renames it over `path`.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      throw IoError("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move '" + tmp.string() + "' to '" + path.string() + "'");
  }
}

}  // namespace spcp
