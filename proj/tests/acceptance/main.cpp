// Acceptance suite. One PASS/FAIL line per criterion; pass criterion ids to run a subset.

#include "deepoly/harness.hpp"
#include "deepoly/runtime.hpp"
#include "support/allen_cahn_fd.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace deepoly;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  /// Records one condition; the detail line lists every condition with its verdict.
  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [violated]");
  }
};

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

double cpu_seconds() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }

double max_abs(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

/// Max |target| over the points a report was tested on.
double target_max(const SolveReport& r) { return max_abs(r.solution_exact); }

void dominance(Outcome& o, const SolveReport& r, const std::string& label) {
  if (!r.train || !r.spotter_train) return;
  o.check(r.train->mse < r.spotter_train->mse,
          label + "train MSE " + sci(r.train->mse) + " < Spotter " + sci(r.spotter_train->mse));
}

/// Failed study cells make the criterion fail with the cell error.
bool cells_ok(Outcome& o, const StudyResult& s) {
  bool ok = true;
  for (const auto& row : s.rows) {
    if (!row.error.empty()) {
      o.check(false, "cell " + sections_label(row.sections) + " failed: " + row.error);
      ok = false;
    }
  }
  return ok;
}

Outcome smooth_1d() {
  Outcome o;
  const double cpu0 = cpu_seconds();
  const auto s = run_study(default_config("fit-1d-smooth"));
  const double cpu = cpu_seconds() - cpu0;
  if (!cells_ok(o, s)) return o;
  const auto& rows = s.rows;
  o.check(rows.front().test.mae <= 5e-4, "MAE@1 " + sci(rows.front().test.mae) + " <= 5e-4");
  o.check(rows.back().test.mae <= 1e-9, "MAE@4 " + sci(rows.back().test.mae) + " <= 1e-9");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k].test.mae > 1e-12) {
      o.check(rows[k].test_order.value_or(0) >= 8, "order " + sections_label(rows[k - 1].sections) + "->" +
                                                       sections_label(rows[k].sections) + " " +
                                                       sci(rows[k].test_order.value_or(0)) + " >= 8");
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = s.reports[k];
    const std::string cell = "@" + sections_label(rows[k].sections) + " ";
    const double jump = max_interface_jump(r);
    if (rows[k].sections[0] > 1) {
      o.check(jump <= 1e-6 * max_abs(r.solution_values), cell + "jump " + sci(jump) + " <= 1e-6 max|u|");
    }
    dominance(o, r, cell);
  }
  o.check(cpu <= 300, "CPU " + sci(cpu) + " s <= 300");
  return o;
}

Outcome smooth_2d() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto s = run_study(default_config("fit-2d-smooth"));
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!cells_ok(o, s)) return o;
  const auto& rows = s.rows;
  o.check(rows.back().test.mae <= 1e-5, "MAE@" + sections_label(rows.back().sections) + " " +
                                            sci(rows.back().test.mae) + " <= 1e-5");
  for (std::size_t k = 1; k < rows.size(); ++k) {
    if (rows[k - 1].sections[0] == 2 && rows[k].sections[0] == 4) {
      o.check(rows[k].test_order.value_or(0) >= 5, "order 2x2->4x4 " + sci(rows[k].test_order.value_or(0)) + " >= 5");
    }
  }
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = s.reports[k];
    const std::string cell = "@" + sections_label(rows[k].sections) + " ";
    if (rows[k].sections[0] > 1) {
      const double jump = max_interface_jump(r);
      o.check(jump <= 1e-6 * max_abs(r.solution_values), cell + "jump " + sci(jump) + " <= 1e-6 max|u|");
    }
    dominance(o, r, cell);
  }
  o.check(wall <= 900, "wall " + sci(wall) + " s <= 900");
  return o;
}

Outcome discontinuous_1d() {
  Outcome o;
  const auto s = run_study(default_config("fit-1d-discontinuous"));
  if (!cells_ok(o, s)) return o;
  o.check(s.rows.back().test.mae <= 1e-4, "MAE@27 " + sci(s.rows.back().test.mae) + " <= 1e-4");
  for (std::size_t k = 0; k < s.rows.size(); ++k) {
    const auto& r = s.reports[k];
    const double peak = max_abs(r.solution_values), bound = 1.2 * target_max(r);
    o.check(peak <= bound, "@" + sections_label(s.rows[k].sections) + " max|u| " + sci(peak) + " <= " + sci(bound));
    dominance(o, r, "@" + sections_label(s.rows[k].sections) + " ");
  }
  return o;
}

Outcome poisson_case1() {
  Outcome o;
  const auto r = run_problem(default_config("poisson-case1"));
  const double mae = r.test->mae, sp = r.spotter_test->mae;
  o.check(mae <= 1e-10, "test MAE " + sci(mae) + " <= 1e-10");
  o.check(mae <= 1e-4 * sp, "Spotter test MAE " + sci(sp) + " >= 1e4 x DeePoly");
  dominance(o, r, "");
  return o;
}

Outcome poisson_case2() {
  Outcome o;
  const auto r = run_problem(default_config("poisson-case2"));
  o.check(r.test->mae <= 1e-6, "test MAE " + sci(r.test->mae) + " <= 1e-6");
  dominance(o, r, "");
  return o;
}

Outcome convection() {
  Outcome o;
  const auto r = run_problem(default_config("convection"));
  o.check(r.test->max_err <= 5e-3, "test max error " + sci(r.test->max_err) + " <= 5e-3");
  const double peak = max_abs(r.solution_values);
  o.check(peak <= 1.1, "max|u| " + sci(peak) + " <= 1.1");
  o.check(r.train->mae < r.spotter_train->mae,
          "train MAE " + sci(r.train->mae) + " < Spotter " + sci(r.spotter_train->mae));
  dominance(o, r, "");
  return o;
}

Outcome allen_cahn() {
  Outcome o;
  const auto config = default_config("allen-cahn");
  o.check(config.samples >= 115 && config.sections == std::vector<int>{3} && config.dt == 0.1 &&
              std::abs(config.dt * config.steps - 1.0) < 1e-12,
          "setup dt 0.1, T 1, " + std::to_string(config.samples) + " samples, 3 segments");
  const auto r = run_problem(config);
  o.check(r.failed_steps == 0, std::to_string(r.failed_steps) + " failed steps");
  const auto ref = oracle::allen_cahn_fd(4096, 1e-4, 1.0);
  double err = 0;
  for (Index j = 0; j < r.solution_points.cols(); ++j) {
    err = std::max(err, std::abs(r.solution_values[j] - ref.at(r.solution_points(0, j))));
  }
  o.check(err <= 1e-2, "L-inf vs FD reference " + sci(err) + " <= 1e-2");
  return o;
}

Outcome burgers() {
  Outcome o;
  const auto r = run_problem(default_config("burgers-steady"));
  const double last = r.history.empty() ? INFINITY : r.history.back();
  o.check(r.converged && r.iterations <= 200 && last <= 1e-4,
          std::to_string(r.iterations) + " iterations, last change " + sci(last) + " <= 1e-4");
  o.check(r.test->max_err <= 1e-3, "L-inf error " + sci(r.test->max_err) + " <= 1e-3");
  dominance(o, r, "");
  return o;
}

Outcome yx() {
  Outcome o;
  YxOptions opt;
  opt.optimizers = {"adam"};
  const auto rows = yx_experiment(opt);
  double lowest = INFINITY;
  int cells = 0;
  for (const auto& row : rows) {
    if (row.method != "dnn") continue;
    ++cells;
    lowest = std::min(lowest, row.mae);
    if (row.epochs != opt.epochs) o.check(false, "cell " + std::to_string(row.depth) + "x" + std::to_string(row.width) +
                                                     " stopped at epoch " + std::to_string(row.epochs));
  }
  o.check(cells == 9, std::to_string(cells) + " Adam cells");
  o.check(lowest >= 1e-4, "lowest Adam MAE " + sci(lowest) + " >= 1e-4");
  o.check(rows.back().method == "deepoly" && rows.back().mae <= 1e-12, "hybrid MAE " + sci(rows.back().mae) + " <= 1e-12");
  return o;
}

Outcome properties() {
  Outcome o;
  // Gradient and jet finite differences, the normal-equations oracle and geometry round
  // trips live in the unit suite; run those cases by name.
  const std::string cases =
      "fit-mse loss and gradient,pinn-residual loss and gradient,feature_jet against finite differences,"
      "solve_ls oracles,geometry properties on random samples";
  const std::string cmd = std::string("\"") + DEEPOLY_UNIT_TESTS + "\" --test-case=\"" + cases + "\" > /dev/null 2>&1";
  o.check(std::system(cmd.c_str()) == 0, "unit property cases");

  RunConfig c = default_config("fit-1d-smooth");
  c.samples = 400;
  c.max_epochs = 500;
  c.study_sections = {1, 2, 4};
  auto csv = [&] {
    std::ostringstream out;
    auto rows = run_study(c).rows;
    for (auto& r : rows) r.time_s = 0;
    write_metrics_csv(out, rows);
    return out.str();
  };
  o.check(csv() == csv(), "identical study CSV on rerun");
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  select_blas_kernels(argc, argv);
  const std::map<int, std::pair<std::string, std::function<Outcome()>>> criteria{
      {1, {"smooth 1D fit", smooth_1d}},        {2, {"smooth 2D fit", smooth_2d}},
      {3, {"discontinuous 1D fit", discontinuous_1d}}, {4, {"Poisson case 1", poisson_case1}},
      {5, {"Poisson case 2", poisson_case2}},   {6, {"convection front", convection}},
      {7, {"Allen-Cahn", allen_cahn}},          {8, {"steady Burgers", burgers}},
      {9, {"y = x", yx}},                       {10, {"property suites", properties}}};

  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  if (ids.empty()) {
    for (const auto& [id, _] : criteria) ids.push_back(id);
  }

  int failed = 0;
  for (int id : ids) {
    const auto it = criteria.find(id);
    if (it == criteria.end()) {
      std::cerr << "unknown criterion " << id << "\n";
      return 2;
    }
    const auto& [name, run] = it->second;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail.str()
              << std::endl;
  }
  return failed ? 1 : 0;
}
