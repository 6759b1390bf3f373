#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qclab/chart.hpp"

// Chart configuration files. The text format is documented in docs/config-format.md;
// a JSON document with the same sections is accepted as well.

namespace qclab {

inline constexpr int kConfigVersion = 1;

struct ChartConfig {
  int version = kConfigVersion;
  std::string name;
  std::string description;
  int n = 0;
  std::vector<std::string> coords;             // empty: x1..x4n, t1..t3
  std::array<std::vector<std::string>, 3> eta;  // coefficient expressions
  std::optional<std::string> factor;
  std::vector<Interval> domain;                // empty: [-1, 1]^m
  int samples = 20;
  std::uint64_t seed = 1;
};

// Errors are LocatedError carrying the 1-based line number (0 for JSON input).
ChartConfig parse_config_text(std::string_view text);
ChartConfig parse_config_json(std::string_view text);
// JSON when the first non-blank character is '{'.
ChartConfig parse_config(std::string_view text);

std::string format_config_text(const ChartConfig& cfg);
std::string format_config_json(const ChartConfig& cfg);

QCChart chart_from_config(const ChartConfig& cfg);
// Coefficients are written in printed form (u1..um variables, 17 significant digits).
ChartConfig config_from_chart(const QCChart& chart);

struct PointValidation {
  std::vector<double> u;
  bool ok = false;
  std::string error_kind;  // empty when ok
  std::string message;
  FrameCheck check;
  double bi1 = 0.0;
  double reeb_min_singular = 0.0;
};

struct ValidationReport {
  std::vector<PointValidation> points;
  bool ok() const;
  // First failure as an exception of its kind (no-op when ok).
  void raise_first() const;
};

// recover_structure, reeb_solve and the frame invariants at each point.
PointValidation validate_point(const QCChart& chart, std::span<const double> u, const Settings& settings = {});
ValidationReport validate_chart(const QCChart& chart, const std::vector<std::vector<double>>& points,
                                const Settings& settings = {});
// Domain center plus the chart's declared sample points.
std::vector<std::vector<double>> declared_points(const QCChart& chart);

// Loads, builds and (unless validate is false) validates at the declared points.
QCChart load_config(const std::string& path, bool validate = true, const Settings& settings = {});
void save_config(const QCChart& chart, const std::string& path);

}  // namespace qclab
