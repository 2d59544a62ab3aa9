// deepoly: command-line front end.
//
//   deepoly fit   --problem fit-1d-smooth [--config run.json] [--seed 3] [--out dir]
//   deepoly pde   --problem poisson-case1
//   deepoly study --problem fit-1d-smooth --sections 1,2,4,8 [--jobs 4]
//   deepoly yx    [--epochs 20000] [--precision double|float|both]
//   deepoly complexity --function sin2pi --eps 1e-3
//
// Exit status: 0 success, 1 solve failure, 2 configuration error.

#include "deepoly/io.hpp"
#include "deepoly/runtime.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <map>
#include <numbers>

using namespace deepoly;
using Json = nlohmann::json;

namespace {

constexpr int kOk = 0;
constexpr int kSolveFailure = 1;
constexpr int kConfigError = 2;

enum class Kind { integer, number, text, int_list };

struct Flag {
  const char* name;  // flag without dashes
  const char* key;   // config key
  Kind kind;
  const char* help;
};

// Every scalar (and list) field of the run config has a flat override.
const std::vector<Flag>& run_flags() {
  static const std::vector<Flag> flags{
      {"problem", "problem", Kind::text, "built-in problem name or 'custom'"},
      {"samples", "samples", Kind::integer, "training/collocation points"},
      {"boundary-samples", "boundary_samples", Kind::integer, "boundary points (0 = samples/5)"},
      {"test-samples", "test_samples", Kind::integer, "random test points for fits (0 = samples)"},
      {"degrees", "degrees", Kind::int_list, "polynomial degree per axis, e.g. 5,5"},
      {"hidden", "hidden", Kind::int_list, "hidden widths, e.g. 12,32,32,25"},
      {"optimizer", "optimizer", Kind::text, "adam or lbfgs"},
      {"learning-rate", "learning_rate", Kind::number, "Adam step size"},
      {"max-epochs", "max_epochs", Kind::integer, "Spotter epoch cap"},
      {"target-loss", "target_loss", Kind::number, "Spotter stopping loss"},
      {"bc-weight", "bc_weight", Kind::number, "PINN boundary weight"},
      {"spotter-points", "spotter_points", Kind::integer, "cap on Spotter training points (0 = all)"},
      {"boundary-weight", "boundary_weight", Kind::number, "boundary row weight"},
      {"continuity-weight", "continuity_weight", Kind::number, "continuity row weight"},
      {"points-per-face", "points_per_face", Kind::integer, "continuity points per interior face"},
      {"continuity-order", "continuity_order", Kind::integer, "matched derivative order (-1 = automatic)"},
      {"rcond", "rcond", Kind::number, "singular value cutoff relative to the largest"},
      {"seed", "seed", Kind::integer, "random seed"},
      {"test-grid", "test_grid", Kind::int_list, "test grid points per axis"},
      {"dt", "dt", Kind::number, "time step"},
      {"steps", "steps", Kind::integer, "number of time steps"},
      {"retrain-threshold", "retrain_threshold", Kind::number, "LS relative residual that triggers a fine-tune"},
      {"pseudo-dt", "pseudo_dt", Kind::number, "pseudo-time step"},
      {"tol", "tol", Kind::number, "pseudo-time stopping change"},
      {"max-iters", "max_iters", Kind::integer, "pseudo-time iteration cap"},
      {"target", "target", Kind::text, "custom problems: CSV of samples"},
      {"jobs", "jobs", Kind::integer, "worker threads for studies"},
  };
  return flags;
}

std::vector<int> int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::exception&) {
      throw ConfigError("expected a comma-separated integer list, got '" + s + "'");
    }
  }
  return out;
}

Json flag_value(const Flag& f, const std::string& raw) {
  try {
    switch (f.kind) {
      case Kind::integer: return Json(std::stoll(raw));
      case Kind::number: return Json(std::stod(raw));
      case Kind::text: return Json(raw);
      case Kind::int_list: return Json(int_list(raw));
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(std::string("--") + f.name + ": bad value '" + raw + "'");
  }
  return {};
}

/// Options shared by the problem subcommands.
struct RunArgs {
  std::string config_path;
  std::string out;
  std::map<std::string, std::string> values;
  std::string sections;  // fit/pde: per-axis counts; study: the refinement list
};

void add_run_options(CLI::App* app, RunArgs& args, bool study) {
  app->add_option("--config", args.config_path, "JSON config file")->check(CLI::ExistingFile);
  app->add_option("--out", args.out, "output directory (overrides output_dir)");
  app->add_option("--sections", args.sections,
                  study ? "section counts per axis to sweep, e.g. 1,2,4,8" : "sections per axis, e.g. 10,10");
  for (const auto& f : run_flags()) app->add_option(std::string("--") + f.name, args.values[f.key], f.help);
}

RunConfig effective_config(const RunArgs& args, bool study, CLI::App* app) {
  Json doc = Json::object();
  if (!args.config_path.empty()) {
    try {
      doc = read_json(args.config_path);
    } catch (const Json::exception& e) {
      throw ConfigError("config: " + args.config_path + ": " + e.what());
    }
  }
  for (const auto& f : run_flags()) {
    if (app->count(std::string("--") + f.name) > 0) doc[f.key] = flag_value(f, args.values.at(f.key));
  }
  if (!args.sections.empty()) doc[study ? "study_sections" : "sections"] = int_list(args.sections);
  if (!args.out.empty()) doc["output_dir"] = args.out;
  return parse_config(doc);
}

void print_metrics(const char* tag, const std::optional<Metrics>& m) {
  if (m) std::cout << "  " << tag << ": mse " << m->mse << "  mae " << m->mae << "  max " << m->max_err << "\n";
}

int run_single(const RunConfig& config, bool want_fit) {
  const auto kind = problem_kind(config.problem);
  if (want_fit != (kind == ProblemKind::fit)) {
    throw ConfigError("'" + config.problem + "' must be run with the '" + (want_fit ? "pde" : "fit") +
                      "' subcommand");
  }
  SolveReport report;
  try {
    report = run_problem(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "solve failed: " << e.what() << "\n";
    return kSolveFailure;
  }
  write_run(config.output_dir, config, report);

  std::cout << config.problem << " (" << report.kind << ")  spotter loss " << report.spotter.final_loss << " after "
            << report.spotter.epochs << " epochs\n";
  print_metrics("train  ", report.train);
  print_metrics("test   ", report.test);
  print_metrics("spotter", report.spotter_test);
  std::cout << "  rank " << report.effective_rank << "/" << report.columns << "  wall " << report.wall_seconds
            << " s  -> " << config.output_dir << "\n";
  for (const auto& d : report.diagnostics) std::cout << "  note: " << d << "\n";

  if (report.failed_steps > 0 || !report.converged) return kSolveFailure;
  return kOk;
}

int run_study_cmd(const RunConfig& config) {
  StudyResult study;
  try {
    study = run_study(config);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::cerr << "study failed: " << e.what() << "\n";
    return kSolveFailure;
  }
  write_study(config.output_dir, config, study);
  write_metrics_csv(std::cout, study.rows);
  bool failed = false;
  for (const auto& r : study.rows) {
    if (!r.error.empty()) {
      std::cerr << "cell " << sections_label(r.sections) << " failed: " << r.error << "\n";
      failed = true;
    }
  }
  return failed ? kSolveFailure : kOk;
}

std::function<double(double)> named_function(const std::string& name) {
  constexpr double pi = std::numbers::pi;
  if (name == "const") return [](double) { return 3.0; };
  if (name == "x2") return [](double x) { return x * x; };
  if (name == "sin2pi") return [pi](double x) { return std::sin(2 * pi * x); };
  if (name == "smooth-1d") return [pi](double x) { return std::sin(2 * pi * x) + 0.5 * std::cos(4 * pi * x); };
  if (name == "runge") return [](double x) { return 1.0 / (1.0 + 25.0 * x * x); };
  if (name == "tanh-front") return [](double x) { return std::tanh(100.0 * (x - 0.3)); };
  throw ConfigError("unknown function '" + name + "' (known: const x2 sin2pi smooth-1d runge tanh-front)");
}

}  // namespace

int main(int argc, char** argv) {
  select_blas_kernels(argc, argv);

  CLI::App app{"Spotter/Sniper function fitting and PDE solver"};
  app.require_subcommand(1);

  RunArgs fit_args, pde_args, study_args;
  auto* fit = app.add_subcommand("fit", "fit a target function");
  add_run_options(fit, fit_args, false);
  auto* pde = app.add_subcommand("pde", "solve a PDE problem (linear, time dependent or steady)");
  add_run_options(pde, pde_args, false);
  auto* study = app.add_subcommand("study", "refinement study over section counts");
  add_run_options(study, study_args, true);

  YxOptions yx_opts;
  std::string yx_precision = "double", yx_optimizers = "adam,lbfgs", yx_out = "out/yx";
  auto* yx = app.add_subcommand("yx", "tanh networks of depth/width 1..3 fitted to y = x, plus the combined space");
  yx->add_option("--epochs", yx_opts.epochs, "training epochs per network")->check(CLI::PositiveNumber);
  yx->add_option("--points", yx_opts.points, "training points on [-1, 1]")->check(CLI::PositiveNumber);
  yx->add_option("--seed", yx_opts.seed, "random seed");
  yx->add_option("--jobs", yx_opts.jobs, "worker threads")->check(CLI::PositiveNumber);
  yx->add_option("--precision", yx_precision, "double, float or both")
      ->check(CLI::IsMember({"double", "float", "both"}));
  yx->add_option("--optimizers", yx_optimizers, "comma list of adam, lbfgs");
  yx->add_option("--out", yx_out, "output directory");

  std::string fn = "sin2pi", cx_out;
  double lo = 0.0, hi = 1.0, eps = 1e-3;
  int max_degree = 40;
  auto* cx = app.add_subcommand("complexity", "minimal polynomial degree reaching a max error on an interval");
  cx->add_option("--function", fn, "const, x2, sin2pi, smooth-1d, runge, tanh-front");
  cx->add_option("--lo", lo, "interval start");
  cx->add_option("--hi", hi, "interval end");
  cx->add_option("--eps", eps, "max error tolerance")->check(CLI::PositiveNumber);
  cx->add_option("--max-degree", max_degree, "largest degree tried")->check(CLI::NonNegativeNumber);
  cx->add_option("--out", cx_out, "optional directory for complexity.json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (fit->parsed()) return run_single(effective_config(fit_args, false, fit), true);
    if (pde->parsed()) return run_single(effective_config(pde_args, false, pde), false);
    if (study->parsed()) return run_study_cmd(effective_config(study_args, true, study));

    if (yx->parsed()) {
      yx_opts.precisions = yx_precision == "both" ? std::vector<std::string>{"double", "float"}
                                                  : std::vector<std::string>{yx_precision};
      yx_opts.optimizers.clear();
      std::stringstream ss(yx_optimizers);
      for (std::string o; std::getline(ss, o, ',');) yx_opts.optimizers.push_back(o);
      std::vector<YxRow> rows;
      try {
        rows = yx_experiment(yx_opts);
      } catch (const ConfigError&) {
        throw;
      } catch (const std::exception& e) {
        std::cerr << "yx failed: " << e.what() << "\n";
        return kSolveFailure;
      }
      std::filesystem::create_directories(yx_out);
      std::ofstream csv(std::filesystem::path(yx_out) / "yx.csv");
      write_yx_csv(csv, rows);
      write_yx_csv(std::cout, rows);
      return kOk;
    }

    if (cx->parsed()) {
      if (!(lo < hi)) throw ConfigError("complexity: need lo < hi");
      const auto m = complexity_probe(named_function(fn), lo, hi, eps, max_degree);
      const Json doc{{"function", fn},  {"interval", {lo, hi}}, {"eps", eps},
                     {"max_degree", max_degree}, {"degree", m ? Json(*m) : Json(nullptr)}, {"version", kVersion}};
      if (!cx_out.empty()) {
        std::filesystem::create_directories(cx_out);
        write_json(std::filesystem::path(cx_out) / "complexity.json", doc);
      }
      std::cout << doc.dump(2) << "\n";
      return m ? kOk : kSolveFailure;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolveFailure;
  }
  return kOk;
}
