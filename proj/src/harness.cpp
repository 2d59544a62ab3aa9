#include "deepoly/harness.hpp"

#include "deepoly/sampling.hpp"

#include <atomic>
#include <chrono>
#include <iomanip>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace deepoly {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

/// Runs job(i) for i in [0, n) on up to `jobs` threads. The first exception is rethrown.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& job) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  for (std::size_t w = 0; w < count; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

MetricsRow row_from(const SolveReport& r, const std::vector<int>& sections) {
  MetricsRow row;
  row.points = r.train_points;
  row.sections = sections;
  row.loss = r.spotter.final_loss;
  if (r.train) row.train = *r.train;
  if (r.test) row.test = *r.test;
  row.time_s = r.wall_seconds;
  return row;
}

std::vector<int> uniform_sections(int s, std::size_t dim) { return std::vector<int>(dim, s); }

}  // namespace

std::string sections_label(const std::vector<int>& sections) {
  std::string out;
  for (std::size_t i = 0; i < sections.size(); ++i) {
    if (i > 0) out += "x";
    out += std::to_string(sections[i]);
  }
  return out;
}

void fill_orders(std::vector<MetricsRow>& rows) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    rows[k].train_order.reset();
    rows[k].test_order.reset();
    if (k == 0) continue;
    const auto& a = rows[k - 1];
    const auto& b = rows[k];
    if (!a.error.empty() || !b.error.empty() || a.sections.empty() || b.sections.empty()) continue;
    const std::vector<double> s{static_cast<double>(a.sections[0]), static_cast<double>(b.sections[0])};
    auto order = [&](double e0, double e1) -> std::optional<double> {
      if (!(e0 > 0) || !(e1 > 0) || s[0] == s[1]) return std::nullopt;
      return convergence_order({e0, e1}, s)[1];
    };
    rows[k].train_order = order(a.train.mae, b.train.mae);
    rows[k].test_order = order(a.test.mae, b.test.mae);
  }
}

void write_metrics_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
  out << kMetricsHeader << "\n";
  for (const auto& r : rows) {
    out << r.points << "," << sections_label(r.sections) << "," << fmt(r.loss) << "," << fmt(r.train.mse) << ","
        << fmt(r.train.mae) << "," << fmt(r.train_order) << "," << fmt(r.test.mse) << "," << fmt(r.test.mae) << ","
        << fmt(r.test_order) << "," << fmt(r.time_s) << "\n";
  }
}

SolveReport run_problem(const RunConfig& config) {
  switch (problem_kind(config.problem)) {
    case ProblemKind::fit: return fit_function(make_fit_problem(config), config.seed);
    case ProblemKind::linear_pde: return solve_linear_pde(make_pde_problem(config), config.seed);
    case ProblemKind::time_dependent: return solve_time_dependent(make_time_problem(config), config.seed);
    case ProblemKind::steady: return solve_pseudo_time(make_steady_problem(config), config.seed);
  }
  throw ConfigError("unknown problem kind");
}

StudyResult run_study(const RunConfig& config) {
  if (config.study_sections.empty()) throw ConfigError("study: no section counts given");
  const std::size_t dim = config.domain.size();
  const std::size_t n = config.study_sections.size();
  StudyResult out;
  out.rows.resize(n);
  out.reports.resize(n);

  auto record = [&](std::size_t i, const std::function<SolveReport(const std::vector<int>&)>& solve) {
    const auto sections = uniform_sections(config.study_sections[i], dim);
    try {
      out.reports[i] = solve(sections);
      out.rows[i] = row_from(out.reports[i], sections);
    } catch (const std::exception& e) {
      out.rows[i].sections = sections;
      out.rows[i].error = e.what();
    }
  };

  const auto kind = problem_kind(config.problem);
  if (kind == ProblemKind::fit) {
    const auto problem = make_fit_problem(config);
    const auto data = fit_data(problem, config.seed);
    const auto trained = fit_spotter(problem, data, config.seed);
    out.spotter = trained.summary;
    parallel_for(n, config.jobs, [&](std::size_t i) {
      record(i, [&](const std::vector<int>& sections) {
        auto p = problem;
        p.sections = sections;
        return fit_with_spotter(p, data, trained, config.seed);
      });
    });
  } else if (kind == ProblemKind::linear_pde) {
    const auto problem = make_pde_problem(config);
    const auto data = pde_data(problem, config.seed);
    const auto trained = pde_spotter(problem, data, config.seed);
    out.spotter = trained.summary;
    parallel_for(n, config.jobs, [&](std::size_t i) {
      record(i, [&](const std::vector<int>& sections) {
        auto p = problem;
        p.sections = sections;
        return solve_with_spotter(p, data, trained);
      });
    });
  } else {
    parallel_for(n, config.jobs, [&](std::size_t i) {
      record(i, [&](const std::vector<int>& sections) {
        auto c = config;
        c.sections = sections;
        return run_problem(c);
      });
    });
    for (const auto& r : out.reports) {
      if (r.spotter.epochs > 0) {
        out.spotter = r.spotter;
        break;
      }
    }
  }
  fill_orders(out.rows);
  return out;
}

double max_interface_jump(const SolveReport& report, int points_per_face) {
  if (!report.space) return 0.0;
  const auto& space = *report.space;
  const auto& part = space.partition();
  const Index K = space.block_width();
  const int count = part.dim() == 1 ? 1 : points_per_face;
  const spotter::MlpModel* model = space.feature_count() > 0 ? &report.model : nullptr;
  double jump = 0.0;
  for (const auto& face : part.interior_faces()) {
    const Eigen::MatrixXd pts = face_points(part, face, count);
    const std::vector<Index> lower(static_cast<std::size_t>(pts.cols()), face.lower);
    const std::vector<Index> upper(static_cast<std::size_t>(pts.cols()), face.upper);
    const auto zero = zero_index(space.dim());
    const Eigen::VectorXd ul = segment_rows(space, model, pts, lower, zero) * report.coeffs.segment(space.block_offset(face.lower), K);
    const Eigen::VectorXd uu = segment_rows(space, model, pts, upper, zero) * report.coeffs.segment(space.block_offset(face.upper), K);
    jump = std::max(jump, (ul - uu).cwiseAbs().maxCoeff());
  }
  return jump;
}

std::optional<int> complexity_probe(const std::function<double(double)>& f, double lo, double hi, double eps,
                                    int max_degree) {
  if (!(eps > 0)) throw InvalidArgument("complexity_probe: eps must be positive");
  if (!(lo < hi)) throw InvalidArgument("complexity_probe: empty interval");
  constexpr Index n = 2048;
  Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(n, -1.0, 1.0);
  Eigen::VectorXd y(n);
  for (Index i = 0; i < n; ++i) y[i] = f(lo + 0.5 * (t[i] + 1.0) * (hi - lo));

  // Chebyshev columns keep the fit well conditioned at high degree.
  Eigen::MatrixXd basis(n, max_degree + 1);
  for (int m = 0; m <= max_degree; ++m) {
    if (m == 0) basis.col(0).setOnes();
    else if (m == 1) basis.col(1) = t;
    else basis.col(m) = 2.0 * t.cwiseProduct(basis.col(m - 1)) - basis.col(m - 2);
    const Eigen::MatrixXd a = basis.leftCols(m + 1);
    const Eigen::VectorXd c = a.colPivHouseholderQr().solve(y);
    if ((a * c - y).cwiseAbs().maxCoeff() <= eps) return m;
  }
  return std::nullopt;
}

namespace {

template <typename Scalar>
YxRow yx_cell(int depth, int width, spotter::Optimizer opt, const YxOptions& o, const Eigen::MatrixXd& x) {
  const auto t0 = Clock::now();
  std::vector<int> widths{1};
  widths.insert(widths.end(), static_cast<std::size_t>(depth), width);
  widths.push_back(1);
  auto model = spotter::MlpModel::glorot(widths, o.seed).template cast<Scalar>();

  spotter::TrainSpec spec;
  spec.optimizer = opt;
  spec.max_epochs = o.epochs;
  spec.target_loss = std::numeric_limits<double>::min();  // run every epoch
  spec.seed = o.seed;
  const Eigen::VectorXd y = x.row(0).transpose();
  auto r = spotter::train(std::move(model), spec, spotter::make_fit_batch<Scalar>(x, y));

  const Eigen::VectorXd pred = spotter::forward_batch(r.model, x).output.row(0).transpose().template cast<double>();
  YxRow row;
  row.method = "dnn";
  row.depth = depth;
  row.width = width;
  row.optimizer = spotter::to_string(opt);
  row.precision = std::is_same_v<Scalar, float> ? "float" : "double";
  row.mae = (pred - y).cwiseAbs().mean();
  row.loss = r.final_loss;
  row.epochs = r.epochs;
  row.diverged = r.diverged;
  row.time_s = seconds_since(t0);
  return row;
}

}  // namespace

std::vector<YxRow> yx_experiment(const YxOptions& o) {
  const auto domain = Domain<double>::box({{-1.0, 1.0}});
  const Eigen::MatrixXd x = uniform_points(domain, o.points, o.seed);

  struct Cell {
    int depth, width;
    spotter::Optimizer opt;
    bool single;
  };
  std::vector<Cell> cells;
  for (const auto& prec : o.precisions) {
    if (prec != "double" && prec != "float") throw ConfigError("yx: precision must be 'double' or 'float'");
    for (const auto& name : o.optimizers) {
      if (name != "adam" && name != "lbfgs") throw ConfigError("yx: optimizer must be 'adam' or 'lbfgs'");
      const auto opt = name == "adam" ? spotter::Optimizer::adam : spotter::Optimizer::lbfgs;
      for (int depth = 1; depth <= 3; ++depth) {
        for (int width = 1; width <= 3; ++width) cells.push_back({depth, width, opt, prec == "float"});
      }
    }
  }

  std::vector<YxRow> rows(cells.size());
  parallel_for(cells.size(), o.jobs, [&](std::size_t i) {
    const auto& c = cells[i];
    rows[i] = c.single ? yx_cell<float>(c.depth, c.width, c.opt, o, x) : yx_cell<double>(c.depth, c.width, c.opt, o, x);
  });

  // Combined space: a width-1 network plus the degree-1 polynomial block on one segment.
  FitProblem p;
  p.target = [](const Eigen::VectorXd& v) { return v[0]; };
  p.domain = domain;
  p.samples = o.points;
  p.sections = {1};
  p.poly = PolySpec{{1}};
  p.spotter.hidden = {1};
  p.spotter.train.max_epochs = o.epochs;
  const auto t0 = Clock::now();
  const auto data = FitData{x, x.row(0).transpose()};
  const auto report = fit_with_spotter(p, data, fit_spotter(p, data, o.seed), o.seed);
  YxRow hybrid;
  hybrid.method = "deepoly";
  hybrid.depth = 1;
  hybrid.width = 1;
  hybrid.optimizer = "adam";
  hybrid.precision = "double";
  hybrid.mae = report.train->mae;
  hybrid.loss = report.spotter.final_loss;
  hybrid.epochs = report.spotter.epochs;
  hybrid.diverged = report.spotter.diverged;
  hybrid.time_s = seconds_since(t0);
  rows.push_back(hybrid);
  return rows;
}

void write_yx_csv(std::ostream& out, const std::vector<YxRow>& rows) {
  out << "method,depth,width,optimizer,precision,mae,loss,epochs,diverged,time_s\n";
  for (const auto& r : rows) {
    out << r.method << "," << r.depth << "," << r.width << "," << r.optimizer << "," << r.precision << ","
        << fmt(r.mae) << "," << fmt(r.loss) << "," << r.epochs << "," << (r.diverged ? "true" : "false") << ","
        << fmt(r.time_s) << "\n";
  }
}

}  // namespace deepoly
