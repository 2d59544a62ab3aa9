#pragma once

#include "deepoly/assembly.hpp"
#include "deepoly/metrics.hpp"
#include "deepoly/spotter/train.hpp"

#include <optional>
#include <string>

namespace deepoly {

using TimeField = std::function<double(const Eigen::VectorXd&, double)>;

struct SniperOptions {
  double boundary_weight = 10.0;
  double continuity_weight = 10.0;
  int points_per_face = 20;  // forced to 1 on 1D faces
  double rcond = 1e-12;
};

/// Network settings shared by every driver.
struct SpotterOptions {
  std::vector<int> hidden{12, 32, 32, 25};
  spotter::TrainSpec train;
  Index max_points = 0;  // cap on training points handed to the network (0 = all)
};

struct SpotterSummary {
  double initial_loss = 0;
  double final_loss = 0;
  int epochs = 0;
  bool reached_target = false;
  bool diverged = false;
  double seconds = 0;
};

struct FitProblem {
  ScalarField target;
  Domain<double> domain;
  Index samples = 2000;
  std::vector<int> sections;
  PolySpec poly;
  SpotterOptions spotter;
  SniperOptions sniper;
  int continuity_order = 1;
  Index test_samples = 0;  // 0 = same as samples
  // Explicit training data; when non-empty `samples` and `target` are only used for testing.
  Eigen::MatrixXd data_points;
  Eigen::VectorXd data_values;
};

struct PdeProblem {
  PdeDescriptor pde;
  ScalarField exact;  // optional
  Domain<double> domain;
  Index samples = 5000;
  Index boundary_samples = 0;  // 0 = samples / 5
  std::vector<int> sections;
  PolySpec poly;
  SpotterOptions spotter;
  SniperOptions sniper;
  int continuity_order = -1;  // -1 = pde.continuity_order()
  std::vector<int> test_grid;
};

/// u_t = sum_terms(u) + f on the spatial domain; terms with state_power are linearized
/// around the previous step.
struct TimeProblem {
  Domain<double> domain;
  std::vector<OperatorTerm> terms;
  ScalarField source;
  TimeField boundary;
  std::vector<bool> dirichlet_faces;
  ScalarField initial;
  double dt = 0.1;
  int steps = 10;
  Index samples = 115;
  Index boundary_samples = 0;
  std::vector<int> sections;
  PolySpec poly;
  SpotterOptions spotter;
  SniperOptions sniper;
  double retrain_threshold = 1e-3;
  std::vector<int> test_grid;
  TimeField exact;  // optional
};

/// Steady problem sum_terms(u) = f solved by pseudo-time iteration.
struct SteadyProblem {
  PdeDescriptor pde;
  ScalarField exact;
  Domain<double> domain;
  Index samples = 200;
  Index boundary_samples = 0;
  std::vector<int> sections;
  PolySpec poly;
  SpotterOptions spotter;
  SniperOptions sniper;
  double pseudo_dt = 1e3;
  double tol = 1e-4;
  int max_iters = 200;
  std::vector<int> test_grid;
};

struct SolveReport {
  std::string kind;
  std::optional<CombinedSpace> space;
  spotter::MlpModel model;
  Eigen::VectorXd coeffs;

  std::optional<Metrics> train;
  std::optional<Metrics> spotter_train;
  std::optional<Metrics> test;
  std::optional<Metrics> spotter_test;
  Index train_points = 0;
  Index test_points = 0;

  SpotterSummary spotter;
  double ls_residual = 0;
  double ls_relative_residual = 0;
  Index effective_rank = 0;
  Index rows = 0;
  Index columns = 0;
  double sniper_seconds = 0;
  double wall_seconds = 0;

  // Time stepping and pseudo-time.
  int steps = 0;
  int failed_steps = 0;
  int retrains = 0;
  int iterations = 0;
  bool converged = true;
  std::vector<double> history;  // per-step relative residual or per-iteration change
  std::vector<std::string> diagnostics;

  // Output grid (test grid, or test points) with values and the exact solution when known.
  Eigen::MatrixXd solution_points;
  Eigen::VectorXd solution_values;
  Eigen::VectorXd solution_exact;
};

/// Network with glorot weights and an input transform mapping `domain` onto [-1, 1].
spotter::MlpModel make_spotter(const Domain<double>& domain, const std::vector<int>& hidden, std::uint64_t seed);

struct TrainedSpotter {
  spotter::MlpModel model;
  SpotterSummary summary;
};

TrainedSpotter train_spotter(spotter::MlpModel model, const spotter::TrainSpec& spec,
                             const spotter::TrainBatch<double>& batch);

/// Sampled training set of a fit problem (either drawn or the explicit data).
struct FitData {
  Eigen::MatrixXd points;
  Eigen::VectorXd values;
};
FitData fit_data(const FitProblem& problem, std::uint64_t seed);

TrainedSpotter fit_spotter(const FitProblem& problem, const FitData& data, std::uint64_t seed);
/// Sniper stage on a trained network.
SolveReport fit_with_spotter(const FitProblem& problem, const FitData& data, const TrainedSpotter& spotter,
                             std::uint64_t seed);
SolveReport fit_function(const FitProblem& problem, std::uint64_t seed);

struct PdeData {
  Eigen::MatrixXd interior;
  Eigen::MatrixXd boundary;
};
PdeData pde_data(const PdeProblem& problem, std::uint64_t seed);
TrainedSpotter pde_spotter(const PdeProblem& problem, const PdeData& data, std::uint64_t seed);
SolveReport solve_with_spotter(const PdeProblem& problem, const PdeData& data, const TrainedSpotter& spotter);
SolveReport solve_linear_pde(const PdeProblem& problem, std::uint64_t seed);

struct TimeState {
  Eigen::VectorXd coeffs;
  double time = 0;
  int step = 0;
};

struct StepResult {
  TimeState next;
  LsSolution ls;
  bool retrained = false;
  bool failed = false;
  std::string diagnostic;
};

/// Step-equation descriptor: u - dt * sum_terms(u; frozen) = prev + dt * f, boundary at t + dt.
PdeDescriptor step_descriptor(const TimeProblem& problem, ScalarField previous, double t_next);

/// One implicit step with frozen features. `model` is fine-tuned in place when the LS
/// relative residual exceeds the retrain threshold.
StepResult time_step(const TimeProblem& problem, const CombinedSpace& space, spotter::MlpModel& model,
                     const TimeState& state, const Eigen::MatrixXd& interior, const Eigen::MatrixXd& boundary);

SolveReport solve_time_dependent(const TimeProblem& problem, std::uint64_t seed);

SolveReport solve_pseudo_time(const SteadyProblem& problem, std::uint64_t seed);

}  // namespace deepoly
