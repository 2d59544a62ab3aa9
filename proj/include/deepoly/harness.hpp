#pragma once

#include "deepoly/problems.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace deepoly {

/// One refinement level of a study.
struct MetricsRow {
  Index points = 0;
  std::vector<int> sections;
  double loss = 0;  // Spotter training loss
  Metrics train;
  std::optional<double> train_order;
  Metrics test;
  std::optional<double> test_order;
  double time_s = 0;
  std::string error;  // non-empty when the cell failed
};

/// "4" in 1D, "6x6" in 2D.
std::string sections_label(const std::vector<int>& sections);

inline constexpr const char* kMetricsHeader =
    "points,sections,loss,train_mse,train_mae,train_order,test_mse,test_mae,test_order,time_s";

/// Fills train_order / test_order from the MAE columns. Orders between a failed cell and
/// its neighbour stay empty.
void fill_orders(std::vector<MetricsRow>& rows);

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows);

struct StudyResult {
  std::vector<MetricsRow> rows;
  std::vector<SolveReport> reports;  // aligned with rows; default-constructed for failed cells
  SpotterSummary spotter;
};

/// Runs `config.study_sections` (each count applied to every axis). Fitting and linear PDE
/// studies train one Spotter and reuse it for every cell; cells run on `config.jobs`
/// threads and rows come back in refinement order.
StudyResult run_study(const RunConfig& config);

/// Runs the problem of `config` once at `config.sections`.
SolveReport run_problem(const RunConfig& config);

/// Largest |u_lower - u_upper| over interior faces, sampled as the continuity rows are.
double max_interface_jump(const SolveReport& report, int points_per_face = 20);

/// Smallest degree M <= max_degree whose least-squares polynomial fit on 2048 uniform points
/// of [lo, hi] has max error <= eps there.
std::optional<int> complexity_probe(const std::function<double(double)>& f, double lo, double hi, double eps,
                                    int max_degree);

struct YxRow {
  std::string method;  // "dnn" or "deepoly"
  int depth = 0;
  int width = 0;
  std::string optimizer;
  std::string precision;
  double mae = 0;
  double loss = 0;
  int epochs = 0;
  bool diverged = false;
  double time_s = 0;
};

struct YxOptions {
  int epochs = 20000;
  Index points = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> optimizers{"adam", "lbfgs"};
  std::vector<std::string> precisions{"double"};
  int jobs = 1;
};

/// tanh networks of depth/width 1..3 fitted to y = x on [-1, 1], plus one combined-space row
/// (1 segment, degree 1).
std::vector<YxRow> yx_experiment(const YxOptions& options);

void write_yx_csv(std::ostream& out, const std::vector<YxRow>& rows);

}  // namespace deepoly
