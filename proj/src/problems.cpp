#include "deepoly/problems.hpp"

#include <fstream>
#include <numbers>
#include <sstream>

namespace deepoly {

namespace targets {

namespace {
constexpr double pi = std::numbers::pi;
constexpr double kAllenCahnEps = 0.01;
constexpr double kBurgersNu = 0.1;
}  // namespace

double smooth_1d(const Eigen::VectorXd& x) { return std::sin(2 * pi * x[0]) + 0.5 * std::cos(4 * pi * x[0]); }

double smooth_2d(const Eigen::VectorXd& p) {
  const double x = p[0], y = p[1];
  const double g1 = std::exp(-(x * x + y * y));
  const double g2 = 0.7 * std::exp(-((x - 1.5) * (x - 1.5) + (y - 1.0) * (y - 1.0)) / 1.2);
  const double g3 = 0.5 * std::exp(-((x + 1.0) * (x + 1.0) + (y + 1.5) * (y + 1.5)) / 0.8);
  const double s = 0.2 * std::sin(3 * x) * std::cos(2 * y);
  const double q = 0.1 * (x * x - y * y) + 0.05 * x * y * y;
  return g1 + g2 + g3 + s + q;
}

double discontinuous_1d(const Eigen::VectorXd& p) {
  const double x = p[0];
  if (x >= 0) return std::cos(10 * x);
  double s = 5;
  for (int k = 1; k <= 4; ++k) s += std::sin(k * x);
  return s;
}

double gradient_2d(const Eigen::VectorXd& p) {
  const double x = p[0], y = p[1];
  const double d = y - 0.4 * std::sin(2.0 * pi * x);
  return 8.0 * std::tanh(15.0 * d) + 0.4 * std::sin(3 * x) * std::cos(2 * y);
}

double poisson_exact(const Eigen::VectorXd& p, double k) { return std::sin(k * pi * p[0]) * std::cos(k * pi * p[1]); }

double poisson_source(const Eigen::VectorXd& p, double k) { return -2 * k * k * pi * pi * poisson_exact(p, k); }

double convection_exact(const Eigen::VectorXd& tx, double speed) {
  return std::tanh(100.0 * (tx[1] - speed * tx[0] - 0.3));
}

double allen_cahn_initial(const Eigen::VectorXd& x) { return x[0] * x[0] * std::cos(pi * x[0]); }

double burgers_amplitude(double nu) {
  // A tanh(A / (4 nu)) = 1 has a unique positive root; A tanh(.) is increasing in A.
  double lo = 0.0, hi = 2.0;
  while (hi * std::tanh(hi / (4 * nu)) < 1.0) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mid * std::tanh(mid / (4 * nu)) < 1.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double burgers_exact(const Eigen::VectorXd& x, double nu) {
  const double a = burgers_amplitude(nu);
  return -a * std::tanh(a * (x[0] - 0.5) / (2 * nu));
}

}  // namespace targets

ProblemKind problem_kind(const std::string& name) {
  if (name.rfind("fit-", 0) == 0 || name == "custom") return ProblemKind::fit;
  if (name == "poisson-case1" || name == "poisson-case2" || name == "convection") return ProblemKind::linear_pde;
  if (name == "allen-cahn") return ProblemKind::time_dependent;
  if (name == "burgers-steady") return ProblemKind::steady;
  throw ConfigError("unknown problem '" + name + "'");
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::fit: return "fit";
    case ProblemKind::linear_pde: return "linear-pde";
    case ProblemKind::time_dependent: return "time-dependent";
    case ProblemKind::steady: return "steady";
  }
  return "unknown";
}

Domain<double> config_domain(const RunConfig& c) { return Domain<double>::box(c.domain); }

SpotterOptions spotter_options(const RunConfig& c) {
  SpotterOptions o;
  o.hidden = c.hidden;
  o.train.optimizer = c.optimizer == "lbfgs" ? spotter::Optimizer::lbfgs : spotter::Optimizer::adam;
  o.train.learning_rate = c.learning_rate;
  o.train.max_epochs = c.max_epochs;
  o.train.target_loss = c.target_loss;
  o.train.bc_weight = c.bc_weight;
  o.train.seed = c.seed;
  o.max_points = c.spotter_points;
  return o;
}

SniperOptions sniper_options(const RunConfig& c) {
  return {c.boundary_weight, c.continuity_weight, c.points_per_face, c.rcond};
}

FitData read_samples_csv(const std::filesystem::path& path, Index dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sample file " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ConfigError("sample file " + path.string() + ": non-numeric row '" + line + "'");
    }
    first = false;
    if (static_cast<Index>(row.size()) != dim + 1) {
      throw ConfigError("sample file " + path.string() + ": expected " + std::to_string(dim + 1) + " columns");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("sample file " + path.string() + " has no samples");
  FitData d;
  d.points.resize(dim, static_cast<Index>(rows.size()));
  d.values.resize(static_cast<Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j) {
    for (Index i = 0; i < dim; ++i) d.points(i, static_cast<Index>(j)) = rows[j][static_cast<std::size_t>(i)];
    d.values[static_cast<Index>(j)] = rows[j].back();
  }
  return d;
}

FitProblem make_fit_problem(const RunConfig& c) {
  if (problem_kind(c.problem) != ProblemKind::fit) throw ConfigError(c.problem + " is not a fitting problem");
  FitProblem p;
  p.domain = config_domain(c);
  p.samples = c.samples;
  p.test_samples = c.test_samples;
  p.sections = c.sections;
  p.poly = PolySpec{c.degrees};
  p.spotter = spotter_options(c);
  p.sniper = sniper_options(c);
  p.continuity_order = c.continuity_order >= 0 ? c.continuity_order : 1;
  if (c.problem == "fit-1d-smooth") p.target = targets::smooth_1d;
  if (c.problem == "fit-2d-smooth") p.target = targets::smooth_2d;
  if (c.problem == "fit-1d-discontinuous") p.target = targets::discontinuous_1d;
  if (c.problem == "fit-2d-gradient") p.target = targets::gradient_2d;
  if (c.problem == "custom") {
    auto data = read_samples_csv(c.target, p.domain.dim());
    p.data_points = std::move(data.points);
    p.data_values = std::move(data.values);
    p.samples = p.data_points.cols();
  }
  return p;
}

PdeProblem make_pde_problem(const RunConfig& c) {
  if (problem_kind(c.problem) != ProblemKind::linear_pde) throw ConfigError(c.problem + " is not a linear PDE problem");
  PdeProblem p;
  p.domain = config_domain(c);
  p.samples = c.samples;
  p.boundary_samples = c.boundary_samples;
  p.sections = c.sections;
  p.poly = PolySpec{c.degrees};
  p.spotter = spotter_options(c);
  p.sniper = sniper_options(c);
  p.continuity_order = c.continuity_order;
  p.test_grid = c.test_grid;
  p.pde.dim = 2;
  if (c.problem == "poisson-case1" || c.problem == "poisson-case2") {
    const double k = c.problem == "poisson-case1" ? 1.0 : 4.0;
    p.pde.terms = {{{2, 0}}, {{0, 2}}};
    p.pde.source = [k](const Eigen::VectorXd& x) { return targets::poisson_source(x, k); };
    p.pde.boundary = [k](const Eigen::VectorXd& x) { return targets::poisson_exact(x, k); };
    p.exact = p.pde.boundary;
  } else {
    // (t, x): u_t + a u_x = 0 with inflow data on t = 0 and x = 0.
    p.pde.terms = {{{1, 0}, 1.0}, {{0, 1}, 0.3}};
    p.pde.boundary = [](const Eigen::VectorXd& tx) { return targets::convection_exact(tx); };
    p.pde.dirichlet_faces = {true, false, true, false};
    p.exact = p.pde.boundary;
  }
  return p;
}

TimeProblem make_time_problem(const RunConfig& c) {
  if (problem_kind(c.problem) != ProblemKind::time_dependent) throw ConfigError(c.problem + " is not time dependent");
  TimeProblem p;
  p.domain = config_domain(c);
  p.samples = c.samples;
  p.boundary_samples = c.boundary_samples;
  p.sections = c.sections;
  p.poly = PolySpec{c.degrees};
  p.spotter = spotter_options(c);
  p.sniper = sniper_options(c);
  p.dt = c.dt;
  p.steps = c.steps;
  p.retrain_threshold = c.retrain_threshold;
  p.test_grid = c.test_grid;
  // eps^2 u_xx + u - u^3, with u^3 linearized as (u^n)^2 u^{n+1}.
  p.terms = {{{2}, targets::kAllenCahnEps * targets::kAllenCahnEps}, {{0}, 1.0}, {{0}, -1.0, {}, 2}};
  p.initial = targets::allen_cahn_initial;
  p.boundary = [](const Eigen::VectorXd&, double) { return -0.5; };
  return p;
}

SteadyProblem make_steady_problem(const RunConfig& c) {
  if (problem_kind(c.problem) != ProblemKind::steady) throw ConfigError(c.problem + " is not a steady problem");
  SteadyProblem p;
  p.domain = config_domain(c);
  p.samples = c.samples;
  p.boundary_samples = c.boundary_samples;
  p.sections = c.sections;
  p.poly = PolySpec{c.degrees};
  p.spotter = spotter_options(c);
  p.sniper = sniper_options(c);
  p.pseudo_dt = c.pseudo_dt;
  p.tol = c.tol;
  p.max_iters = c.max_iters;
  p.test_grid = c.test_grid;
  // nu u_xx - u u_x = 0, u(0) = 1, u(1) = -1; u u_x is linearized as u^k u_x^{k+1}.
  const double nu = targets::kBurgersNu;
  p.pde.dim = 1;
  p.pde.terms = {{{2}, nu}, {{1}, -1.0, {}, 1}};
  p.pde.boundary = [](const Eigen::VectorXd& x) { return x[0] < 0.5 ? 1.0 : -1.0; };
  p.exact = [nu, a = targets::burgers_amplitude(nu)](const Eigen::VectorXd& x) {
    return -a * std::tanh(a * (x[0] - 0.5) / (2 * nu));
  };
  return p;
}

}  // namespace deepoly
