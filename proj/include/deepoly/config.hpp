#pragma once

#include "deepoly/common.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <utility>

namespace deepoly {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Effective run configuration. Every field is filled, either from the built-in problem
/// registry or from the user document.
struct RunConfig {
  std::string problem;
  std::vector<std::pair<double, double>> domain;
  Index samples = 0;
  Index boundary_samples = 0;
  Index test_samples = 0;
  std::vector<int> sections;
  std::vector<int> degrees;
  std::vector<int> hidden{12, 32, 32, 25};

  std::string optimizer = "adam";
  double learning_rate = 1e-3;
  int max_epochs = 30000;
  double target_loss = 2e-5;
  double bc_weight = 10.0;
  Index spotter_points = 0;

  double boundary_weight = 10.0;
  double continuity_weight = 10.0;
  int points_per_face = 20;
  int continuity_order = -1;
  double rcond = 1e-12;

  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::vector<int> test_grid;

  double dt = 0.1;
  int steps = 10;
  double retrain_threshold = 1e-3;
  double pseudo_dt = 1e3;
  double tol = 1e-4;
  int max_iters = 200;

  std::string target;  // custom problems: CSV of samples (coordinates..., value)
  std::vector<int> study_sections;
  int jobs = 1;
};

/// Names of the built-in problems (plus "custom").
std::vector<std::string> problem_names();

/// Registry defaults for a problem name.
RunConfig default_config(const std::string& problem);

/// Builds the effective config: registry defaults for `doc["problem"]` overlaid with the
/// document's keys. Unknown keys and missing required fields raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_file(const std::filesystem::path& path);

nlohmann::json to_json(const RunConfig& config);

}  // namespace deepoly
