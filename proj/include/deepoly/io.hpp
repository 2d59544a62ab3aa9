#pragma once

#include "deepoly/config.hpp"
#include "deepoly/harness.hpp"

#include "json.hpp"

#include <filesystem>

namespace deepoly {

inline constexpr const char* kVersion = "deepoly 0.1.0";

/// widths, row-major weight arrays, biases, activation tag, seed and the input transform.
nlohmann::json model_to_json(const spotter::MlpModel& model);
spotter::MlpModel model_from_json(const nlohmann::json& doc);

/// Coefficient vector with the column layout needed to rebuild the combined space.
nlohmann::json coefficients_to_json(const CombinedSpace& space, const Eigen::VectorXd& coeffs);
std::pair<CombinedSpace, Eigen::VectorXd> coefficients_from_json(const nlohmann::json& doc);

nlohmann::json metrics_to_json(const Metrics& m);
nlohmann::json report_to_json(const SolveReport& report);

/// Columns x0..x{d-1}, value, plus exact when the report carries it.
void write_solution_csv(const std::filesystem::path& path, const SolveReport& report);

void write_json(const std::filesystem::path& path, const nlohmann::json& doc);
nlohmann::json read_json(const std::filesystem::path& path);

/// Writes config.echo.json, report.json, metrics.csv, solution.csv, model.json and
/// coefficients.json into `dir` (created if needed).
void write_run(const std::filesystem::path& dir, const RunConfig& config, const SolveReport& report);

/// Study outputs: config.echo.json, metrics.csv, report.json (per-cell summaries) and the
/// finest successful cell's solution.csv.
void write_study(const std::filesystem::path& dir, const RunConfig& config, const StudyResult& study);

}  // namespace deepoly
