#pragma once

#include "deepoly/config.hpp"
#include "deepoly/solvers.hpp"

namespace deepoly {

namespace targets {

/// sin(2 pi x) + 0.5 cos(4 pi x)
double smooth_1d(const Eigen::VectorXd& x);
/// Three Gaussians, a trigonometric ripple and a quadratic.
double smooth_2d(const Eigen::VectorXd& x);
/// 5 + sum_{k=1..4} sin(k x) for x < 0, cos(10 x) otherwise.
double discontinuous_1d(const Eigen::VectorXd& x);
/// 8 tanh(15 (y - 0.4 sin(2 pi x))) + 0.4 sin(3x) cos(2y)
double gradient_2d(const Eigen::VectorXd& x);

/// sin(k pi x) cos(k pi y) and its Laplacian -2 k^2 pi^2 sin(k pi x) cos(k pi y).
double poisson_exact(const Eigen::VectorXd& x, double k);
double poisson_source(const Eigen::VectorXd& x, double k);

/// tanh(100 (x - a t - 0.3)) on (t, x).
double convection_exact(const Eigen::VectorXd& tx, double speed = 0.3);

double allen_cahn_initial(const Eigen::VectorXd& x);

/// Constant A of the steady Burgers profile -A tanh(A (x - 1/2) / (2 nu)) with u(0) = 1.
double burgers_amplitude(double nu);
double burgers_exact(const Eigen::VectorXd& x, double nu);

}  // namespace targets

enum class ProblemKind { fit, linear_pde, time_dependent, steady };

ProblemKind problem_kind(const std::string& name);
std::string to_string(ProblemKind kind);

Domain<double> config_domain(const RunConfig& config);
SpotterOptions spotter_options(const RunConfig& config);
SniperOptions sniper_options(const RunConfig& config);

FitProblem make_fit_problem(const RunConfig& config);
PdeProblem make_pde_problem(const RunConfig& config);
TimeProblem make_time_problem(const RunConfig& config);
SteadyProblem make_steady_problem(const RunConfig& config);

/// Reads rows "x_1,...,x_d,value" (an optional non-numeric header line is skipped).
FitData read_samples_csv(const std::filesystem::path& path, Index dim);

}  // namespace deepoly
