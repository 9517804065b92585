#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spcp/errors.hpp"

namespace spcp {

// Column naming for a scenario of the given shape:
// t, y_c, x_c1..x_cN, y1..yM, w, u, e1..e(N-1).
inline std::vector<std::string> trace_column_names(std::size_t paths, std::size_t stages) {
  std::vector<std::string> names{"t", "y_c"};
  for (std::size_t i = 1; i <= paths; ++i) names.push_back("x_c" + std::to_string(i));
  for (std::size_t j = 1; j <= stages; ++j) names.push_back("y" + std::to_string(j));
  names.emplace_back("w");
  names.emplace_back("u");
  for (std::size_t k = 1; k < paths; ++k) names.push_back("e" + std::to_string(k));
  return names;
}

/// Column-major time series. Column 0 is always time.
class Trace {
 public:
  Trace() = default;

  explicit Trace(std::vector<std::string> names) : names_(std::move(names)) {
    if (names_.empty() || names_.front() != "t") {
      throw ConfigError("trace: first column must be 't'");
    }
    columns_.resize(names_.size());
  }

  const std::vector<std::string>& names() const { return names_; }
  std::size_t column_count() const { return names_.size(); }
  std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
  bool empty() const { return rows() == 0; }

  void reserve(std::size_t rows) {
    for (auto& c : columns_) c.reserve(rows);
  }

  void append(std::span<const double> row) {
    if (row.size() != columns_.size()) {
      throw ConfigError("trace: row has " + std::to_string(row.size()) + " values, expected " +
                        std::to_string(columns_.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) columns_[i].push_back(row[i]);
  }

  bool has_column(std::string_view name) const {
    return std::find(names_.begin(), names_.end(), name) != names_.end();
  }

  std::size_t index_of(std::string_view name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    if (it == names_.end()) {
      throw ConfigError("trace: unknown column '" + std::string(name) + "'");
    }
    return static_cast<std::size_t>(it - names_.begin());
  }

  const std::vector<double>& column(std::size_t i) const { return columns_.at(i); }
  const std::vector<double>& column(std::string_view name) const { return columns_[index_of(name)]; }
  const std::vector<double>& time() const { return columns_.front(); }

  friend bool operator==(const Trace&, const Trace&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<std::vector<double>> columns_;
};

}  // namespace spcp
