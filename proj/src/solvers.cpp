#include "deepoly/solvers.hpp"

#include "deepoly/sampling.hpp"

#include <chrono>
#include <sstream>

namespace deepoly {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Eigen::VectorXd network_values(const spotter::MlpModel& model, const Eigen::MatrixXd& x) {
  return spotter::forward_batch(model, x).output.row(0).transpose();
}

Eigen::VectorXd field_values(const ScalarField& f, const Eigen::MatrixXd& x) {
  Eigen::VectorXd v(x.cols());
  for (Index j = 0; j < x.cols(); ++j) v[j] = f(x.col(j));
  return v;
}

Eigen::MatrixXd first_columns(const Eigen::MatrixXd& x, Index cap) {
  return cap > 0 && cap < x.cols() ? Eigen::MatrixXd(x.leftCols(cap)) : x;
}

Eigen::VectorXd first_entries(const Eigen::VectorXd& v, Index cap) {
  return cap > 0 && cap < v.size() ? Eigen::VectorXd(v.head(cap)) : v;
}

Eigen::MatrixXd hstack(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  Eigen::MatrixXd out(a.rows(), a.cols() + b.cols());
  out << a, b;
  return out;
}

Eigen::MatrixXd test_points(const Domain<double>& domain, const std::vector<int>& grid, Index samples,
                            std::uint64_t seed) {
  return grid.empty() ? uniform_points(domain, samples, seed) : grid_points(domain, grid);
}

/// Solves the assembled rows plus interface continuity and records the LS diagnostics.
LsSolution sniper_solve(LinearSystem sys, const CombinedSpace& space, const spotter::MlpModel& model,
                        int continuity_order, const SniperOptions& opts, SolveReport& report) {
  if (space.partition().size() > 1) {
    sys.append(assemble_continuity(space, model, continuity_order, opts.points_per_face, opts.continuity_weight));
  }
  report.rows = sys.rows();
  report.columns = sys.cols();
  auto sol = solve_ls(sys, opts.rcond);
  report.ls_residual = sol.residual_norm;
  report.ls_relative_residual = sol.relative_residual;
  report.effective_rank = sol.effective_rank;
  return sol;
}

/// Fills test metrics and the solution grid from the final coefficients.
void record_solution(SolveReport& report, const Eigen::MatrixXd& pts, const ScalarField& exact) {
  const auto& space = *report.space;
  report.solution_points = pts;
  report.solution_values = evaluate(space, report.coeffs, report.model, pts, zero_index(space.dim()));
  report.test_points = pts.cols();
  if (exact) {
    report.solution_exact = field_values(exact, pts);
    report.test = metrics(report.solution_values, report.solution_exact);
    report.spotter_test = metrics(network_values(report.model, pts), report.solution_exact);
  }
}

PdeDescriptor with_frozen_state(PdeDescriptor pde, ScalarField state) {
  pde.frozen_state = std::move(state);
  return pde;
}

}  // namespace

spotter::MlpModel make_spotter(const Domain<double>& domain, const std::vector<int>& hidden, std::uint64_t seed) {
  std::vector<int> widths{static_cast<int>(domain.dim())};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(1);
  auto model = spotter::MlpModel::glorot(widths, seed);
  const Eigen::VectorXd center = 0.5 * (domain.lo() + domain.hi());
  const Eigen::VectorXd scale = 2.0 * domain.lengths().cwiseInverse();
  model.set_input_transform(center, scale);
  return model;
}

TrainedSpotter train_spotter(spotter::MlpModel model, const spotter::TrainSpec& spec,
                             const spotter::TrainBatch<double>& batch) {
  const auto t0 = Clock::now();
  auto r = spotter::train(std::move(model), spec, batch);
  TrainedSpotter out{std::move(r.model), {}};
  out.summary.initial_loss = r.loss_history.empty() ? r.final_loss : r.loss_history.front();
  out.summary.final_loss = r.final_loss;
  out.summary.epochs = r.epochs;
  out.summary.reached_target = r.reached_target;
  out.summary.diverged = r.diverged;
  out.summary.seconds = seconds_since(t0);
  return out;
}

// ---------------------------------------------------------------------------------------------
// Function fitting

FitData fit_data(const FitProblem& problem, std::uint64_t seed) {
  if (problem.data_points.cols() > 0) {
    if (problem.data_points.cols() != problem.data_values.size()) {
      throw InvalidArgument("fit: data point/value count mismatch");
    }
    return {problem.data_points, problem.data_values};
  }
  if (!problem.target) throw InvalidArgument("fit: no target function or data");
  if (problem.samples < 1) throw InvalidArgument("fit: samples must be positive");
  FitData d;
  d.points = uniform_points(problem.domain, problem.samples, seed);
  d.values = field_values(problem.target, d.points);
  return d;
}

TrainedSpotter fit_spotter(const FitProblem& problem, const FitData& data, std::uint64_t seed) {
  auto spec = problem.spotter.train;
  spec.loss = spotter::LossKind::fit_mse;
  spec.seed = seed;
  const Index cap = problem.spotter.max_points;
  return train_spotter(make_spotter(problem.domain, problem.spotter.hidden, seed), spec,
                       spotter::make_fit_batch<double>(first_columns(data.points, cap), first_entries(data.values, cap)));
}

SolveReport fit_with_spotter(const FitProblem& problem, const FitData& data, const TrainedSpotter& trained,
                             std::uint64_t seed) {
  const auto t0 = Clock::now();
  SolveReport report;
  report.kind = "fit";
  report.model = trained.model;
  report.spotter = trained.summary;
  report.space.emplace(partition_domain(problem.domain, problem.sections), trained.model.feature_count(), problem.poly);
  const auto& space = *report.space;

  const auto sol = sniper_solve(assemble_fit(space, report.model, data.points, data.values), space, report.model,
                                problem.continuity_order, problem.sniper, report);
  report.coeffs = sol.coeffs;
  report.train_points = data.points.cols();
  report.train = metrics(evaluate(space, report.coeffs, report.model, data.points, zero_index(space.dim())), data.values);
  report.spotter_train = metrics(network_values(report.model, data.points), data.values);
  report.sniper_seconds = seconds_since(t0);

  const Index n_test = problem.test_samples > 0 ? problem.test_samples : data.points.cols();
  record_solution(report, uniform_points(problem.domain, n_test, seed + 1), problem.target);
  report.wall_seconds = report.spotter.seconds + seconds_since(t0);
  return report;
}

SolveReport fit_function(const FitProblem& problem, std::uint64_t seed) {
  const auto data = fit_data(problem, seed);
  return fit_with_spotter(problem, data, fit_spotter(problem, data, seed), seed);
}

// ---------------------------------------------------------------------------------------------
// Linear PDE

PdeData pde_data(const PdeProblem& problem, std::uint64_t seed) {
  if (problem.samples < 1) throw InvalidArgument("pde: samples must be positive");
  const Index nb = problem.boundary_samples > 0 ? problem.boundary_samples : std::max<Index>(problem.samples / 5, 1);
  return {uniform_points(problem.domain, problem.samples, seed),
          boundary_points(problem.domain, nb, seed + 7, problem.pde.dirichlet_faces)};
}

TrainedSpotter pde_spotter(const PdeProblem& problem, const PdeData& data, std::uint64_t seed) {
  auto spec = problem.spotter.train;
  spec.loss = spotter::LossKind::pinn_residual;
  spec.seed = seed;
  const Index cap = problem.spotter.max_points;
  return train_spotter(make_spotter(problem.domain, problem.spotter.hidden, seed), spec,
                       spotter::make_pinn_batch<double>(problem.pde, first_columns(data.interior, cap), data.boundary));
}

SolveReport solve_with_spotter(const PdeProblem& problem, const PdeData& data, const TrainedSpotter& trained) {
  if (problem.pde.has_state_terms() && !problem.pde.frozen_state) {
    throw InvalidArgument("solve_linear_pde: descriptor has nonlinear terms");
  }
  const auto t0 = Clock::now();
  SolveReport report;
  report.kind = "pde";
  report.model = trained.model;
  report.spotter = trained.summary;
  report.space.emplace(partition_domain(problem.domain, problem.sections), trained.model.feature_count(), problem.poly);
  const auto& space = *report.space;
  const int order = problem.continuity_order >= 0 ? problem.continuity_order : problem.pde.continuity_order();

  const auto sys = assemble_pde(space, report.model, problem.pde, data.interior, data.boundary,
                                problem.sniper.boundary_weight);
  report.coeffs = sniper_solve(sys, space, report.model, order, problem.sniper, report).coeffs;
  report.sniper_seconds = seconds_since(t0);

  const Eigen::MatrixXd all = hstack(data.interior, data.boundary);
  report.train_points = all.cols();
  if (problem.exact) {
    const Eigen::VectorXd truth = field_values(problem.exact, all);
    report.train = metrics(evaluate(space, report.coeffs, report.model, all, zero_index(space.dim())), truth);
    report.spotter_train = metrics(network_values(report.model, all), truth);
  }
  record_solution(report, test_points(problem.domain, problem.test_grid, problem.samples, 0), problem.exact);
  report.wall_seconds = report.spotter.seconds + seconds_since(t0);
  return report;
}

SolveReport solve_linear_pde(const PdeProblem& problem, std::uint64_t seed) {
  const auto data = pde_data(problem, seed);
  return solve_with_spotter(problem, data, pde_spotter(problem, data, seed));
}

// ---------------------------------------------------------------------------------------------
// Implicit time stepping

PdeDescriptor step_descriptor(const TimeProblem& problem, ScalarField previous, double t_next) {
  const Index dim = problem.domain.dim();
  PdeDescriptor d;
  d.dim = dim;
  d.terms.push_back({zero_index(dim), 1.0, {}, 0});
  for (auto t : problem.terms) {
    t.scale *= -problem.dt;
    d.terms.push_back(std::move(t));
  }
  const double dt = problem.dt;
  d.source = [previous, src = problem.source, dt](const Eigen::VectorXd& x) {
    return previous(x) + (src ? dt * src(x) : 0.0);
  };
  if (problem.boundary) {
    d.boundary = [g = problem.boundary, t_next](const Eigen::VectorXd& x) { return g(x, t_next); };
  }
  d.dirichlet_faces = problem.dirichlet_faces;
  d.frozen_state = std::move(previous);
  return d;
}

namespace {

/// Frozen evaluator of a state; owns copies so later retraining does not alter it.
ScalarField state_field(const CombinedSpace& space, const spotter::MlpModel& model, const Eigen::VectorXd& coeffs) {
  return [space, model, coeffs](const Eigen::VectorXd& x) {
    return evaluate(space, coeffs, model, x, zero_index(space.dim()))[0];
  };
}

int spatial_continuity(const std::vector<OperatorTerm>& terms) {
  int order = 0;
  for (const auto& t : terms) order = std::max(order, total_order(t.deriv));
  return std::max(0, order - 1);
}

}  // namespace

StepResult time_step(const TimeProblem& problem, const CombinedSpace& space, spotter::MlpModel& model,
                     const TimeState& state, const Eigen::MatrixXd& interior, const Eigen::MatrixXd& boundary) {
  if (!(problem.dt > 0)) throw InvalidArgument("time_step: dt must be positive");
  const double t_next = state.time + problem.dt;
  const auto desc = step_descriptor(problem, state_field(space, model, state.coeffs), t_next);
  const int order = spatial_continuity(problem.terms);

  auto solve = [&] {
    SolveReport scratch;
    auto sys = assemble_pde(space, model, desc, interior, boundary, problem.sniper.boundary_weight);
    return sniper_solve(std::move(sys), space, model, order, problem.sniper, scratch);
  };

  StepResult out;
  out.ls = solve();
  if (out.ls.relative_residual > problem.retrain_threshold) {
    auto spec = problem.spotter.train;
    spec.loss = spotter::LossKind::pinn_residual;
    model = spotter::train(model, spec, spotter::make_pinn_batch<double>(desc, interior, boundary)).model;
    out.retrained = true;
    out.ls = solve();
    if (out.ls.relative_residual > problem.retrain_threshold) {
      out.failed = true;
      std::ostringstream msg;
      msg << "step " << state.step + 1 << ": relative LS residual " << out.ls.relative_residual
          << " above retrain threshold " << problem.retrain_threshold << " after fine-tuning";
      out.diagnostic = msg.str();
    }
  }
  out.next = {out.ls.coeffs, t_next, state.step + 1};
  return out;
}

SolveReport solve_time_dependent(const TimeProblem& problem, std::uint64_t seed) {
  if (!(problem.dt > 0)) throw InvalidArgument("time problem: dt must be positive");
  if (problem.steps < 0) throw InvalidArgument("time problem: negative step count");
  if (!problem.initial) throw InvalidArgument("time problem: initial condition required");
  const auto t0 = Clock::now();
  SolveReport report;
  report.kind = "time";

  const Eigen::MatrixXd interior = uniform_points(problem.domain, problem.samples, seed);
  const Index nb = problem.boundary_samples > 0 ? problem.boundary_samples : std::max<Index>(problem.samples / 5, 1);
  const Eigen::MatrixXd boundary = boundary_points(problem.domain, nb, seed + 7, problem.dirichlet_faces);
  report.train_points = interior.cols() + boundary.cols();

  // Spotter: features of the initial condition.
  const Eigen::VectorXd u0 = field_values(problem.initial, interior);
  auto spec = problem.spotter.train;
  spec.loss = spotter::LossKind::fit_mse;
  spec.seed = seed;
  const Index cap = problem.spotter.max_points;
  auto trained = train_spotter(make_spotter(problem.domain, problem.spotter.hidden, seed), spec,
                               spotter::make_fit_batch<double>(first_columns(interior, cap), first_entries(u0, cap)));
  report.spotter = trained.summary;
  spotter::MlpModel model = std::move(trained.model);
  report.space.emplace(partition_domain(problem.domain, problem.sections), model.feature_count(), problem.poly);
  const auto& space = *report.space;

  // Initial state: projection of the initial condition onto the combined space.
  SolveReport scratch;
  TimeState state;
  state.coeffs = sniper_solve(assemble_fit(space, model, interior, u0), space, model,
                              std::max(1, spatial_continuity(problem.terms)), problem.sniper, scratch)
                     .coeffs;

  for (int n = 0; n < problem.steps; ++n) {
    auto step = time_step(problem, space, model, state, interior, boundary);
    report.history.push_back(step.ls.relative_residual);
    report.retrains += step.retrained ? 1 : 0;
    if (step.failed) {
      ++report.failed_steps;
      report.diagnostics.push_back(step.diagnostic);
    }
    report.ls_residual = step.ls.residual_norm;
    report.ls_relative_residual = step.ls.relative_residual;
    report.effective_rank = step.ls.effective_rank;
    state = std::move(step.next);
  }
  report.steps = state.step;
  report.converged = report.failed_steps == 0;
  report.model = model;
  report.coeffs = state.coeffs;
  report.rows = scratch.rows;
  report.columns = space.column_count();

  ScalarField exact;
  if (problem.exact) exact = [e = problem.exact, t = state.time](const Eigen::VectorXd& x) { return e(x, t); };
  if (exact) {
    const Eigen::MatrixXd all = hstack(interior, boundary);
    const Eigen::VectorXd truth = field_values(exact, all);
    report.train = metrics(evaluate(space, report.coeffs, model, all, zero_index(space.dim())), truth);
  }
  record_solution(report, test_points(problem.domain, problem.test_grid, problem.samples, seed + 1), exact);
  report.spotter_test.reset();  // network approximates u0, not the final state
  report.wall_seconds = seconds_since(t0);
  report.sniper_seconds = report.wall_seconds - report.spotter.seconds;
  return report;
}

// ---------------------------------------------------------------------------------------------
// Pseudo-time iteration

SolveReport solve_pseudo_time(const SteadyProblem& problem, std::uint64_t seed) {
  if (!(problem.pseudo_dt > 0)) throw InvalidArgument("pseudo-time: pseudo_dt must be positive");
  if (problem.max_iters < 1) throw InvalidArgument("pseudo-time: max_iters must be >= 1");
  problem.pde.validate();
  const auto t0 = Clock::now();
  SolveReport report;
  report.kind = "pseudo-time";

  const Index dim = problem.domain.dim();
  const Eigen::MatrixXd interior = uniform_points(problem.domain, problem.samples, seed);
  const Index nb = problem.boundary_samples > 0 ? problem.boundary_samples : std::max<Index>(problem.samples / 5, 1);
  const Eigen::MatrixXd boundary = boundary_points(problem.domain, nb, seed + 7, problem.pde.dirichlet_faces);
  const Eigen::MatrixXd all = hstack(interior, boundary);
  report.train_points = all.cols();

  // Preliminary network solve of the full nonlinear problem gives the initial field.
  auto spec = problem.spotter.train;
  spec.loss = spotter::LossKind::pinn_residual;
  spec.seed = seed;
  auto trained = train_spotter(make_spotter(problem.domain, problem.spotter.hidden, seed), spec,
                               spotter::make_pinn_batch<double>(problem.pde, first_columns(interior, problem.spotter.max_points),
                                                                boundary));
  report.spotter = trained.summary;
  report.model = std::move(trained.model);
  report.space.emplace(partition_domain(problem.domain, problem.sections), report.model.feature_count(), problem.poly);
  const auto& space = *report.space;
  const auto& model = report.model;
  const int order = problem.pde.continuity_order();

  Eigen::VectorXd coeffs = embed_network(space, model);
  report.converged = false;
  if (!problem.pde.has_state_terms()) {
    auto sys = assemble_pde(space, model, problem.pde, interior, boundary, problem.sniper.boundary_weight);
    coeffs = sniper_solve(std::move(sys), space, model, order, problem.sniper, report).coeffs;
    report.iterations = 1;
    report.converged = true;
  } else {
    for (int k = 0; k < problem.max_iters; ++k) {
      const ScalarField previous = state_field(space, model, coeffs);
      PdeDescriptor d;
      d.dim = dim;
      d.terms.push_back({zero_index(dim), 1.0, {}, 0});
      for (auto t : problem.pde.terms) {
        t.scale *= -problem.pseudo_dt;
        d.terms.push_back(std::move(t));
      }
      d.source = [previous, f = problem.pde.source, dtau = problem.pseudo_dt](const Eigen::VectorXd& x) {
        return previous(x) - (f ? dtau * f(x) : 0.0);
      };
      d.boundary = problem.pde.boundary;
      d.dirichlet_faces = problem.pde.dirichlet_faces;
      d = with_frozen_state(std::move(d), previous);

      auto sys = assemble_pde(space, model, d, interior, boundary, problem.sniper.boundary_weight);
      const Eigen::VectorXd next = sniper_solve(std::move(sys), space, model, order, problem.sniper, report).coeffs;
      const double change =
          evaluate(space, next - coeffs, model, all, zero_index(dim)).cwiseAbs().maxCoeff();
      coeffs = next;
      report.iterations = k + 1;
      report.history.push_back(change);
      if (change <= problem.tol) {
        report.converged = true;
        break;
      }
    }
    if (!report.converged) {
      report.diagnostics.push_back("pseudo-time: no convergence within " + std::to_string(problem.max_iters) +
                                   " iterations");
    }
  }
  report.coeffs = coeffs;
  if (problem.exact) {
    const Eigen::VectorXd truth = field_values(problem.exact, all);
    report.train = metrics(evaluate(space, coeffs, model, all, zero_index(dim)), truth);
    report.spotter_train = metrics(network_values(model, all), truth);
  }
  record_solution(report, test_points(problem.domain, problem.test_grid, problem.samples, seed + 1), problem.exact);
  report.wall_seconds = seconds_since(t0);
  report.sniper_seconds = report.wall_seconds - report.spotter.seconds;
  return report;
}

}  // namespace deepoly
