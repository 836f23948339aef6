#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "steerbandit/experiments.hpp"

namespace steerbandit {

/// Shortest decimal that parses back to the same double. Non-finite values
/// are written as nan, inf and -inf.
std::string format_number(double value);
/// Strict parse of a whole field; throws IoError on trailing junk.
double parse_number(std::string_view text);

/// Header `t,J,pi_1..pi_K,gamma_t,delta_t,cond2_ok`. Missing optional
/// values are empty fields. Group seeds are not part of this table.
std::string trajectory_csv(std::span<const TrajectoryRecord> records, std::size_t arm_count);

struct ParsedTrajectory {
  std::size_t arm_count = 0;
  std::vector<TrajectoryRecord> records;
};

ParsedTrajectory parse_trajectory_csv(std::string_view text);

/// One row per (replication, t): `replication,seed,t,J,pi_1..pi_K,gamma_t,delta_t,cond2_ok,group_seed`.
std::string replications_csv(const EmpiricalRun& run, std::size_t arm_count);
/// `t,q25,median,q75`.
std::string summary_csv(std::span<const QuantileRow> rows);

/// Two-space indent, keys sorted, trailing newline.
std::string dump_json(const nlohmann::json& doc);

struct PlotSeries {
  std::string label;
  std::vector<double> t;
  std::vector<double> J;
};

/// J against t on top and the optimality gap on a log axis below. When no
/// optimum is given the largest J across all series is used.
std::string convergence_svg(std::span<const PlotSeries> series, std::optional<double> optimum);

PlotSeries series_from_records(std::string label, std::span<const TrajectoryRecord> records);

std::string read_file(const std::filesystem::path& path);
/// Creates parent directories as needed.
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace steerbandit
