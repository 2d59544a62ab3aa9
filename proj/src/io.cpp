#include "deepoly/io.hpp"

#include <fstream>
#include <iomanip>

namespace deepoly {

namespace {

using Json = nlohmann::json;

Json vector_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd vector_from(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Index>(v.size()));
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

Json optional_metrics(const std::optional<Metrics>& m) { return m ? metrics_to_json(*m) : Json(nullptr); }

}  // namespace

Json model_to_json(const spotter::MlpModel& model) {
  Json weights = Json::array(), biases = Json::array();
  for (Index l = 0; l < model.layer_count(); ++l) {
    const auto& w = model.weight(l);
    Json rows = Json::array();
    for (Index r = 0; r < w.rows(); ++r) rows.push_back(vector_json(w.row(r).transpose()));
    weights.push_back(std::move(rows));
    biases.push_back(vector_json(model.bias(l)));
  }
  return Json{{"widths", model.widths()},
              {"weights", std::move(weights)},
              {"biases", std::move(biases)},
              {"activation", "tanh"},
              {"seed", model.seed()},
              {"input_offset", vector_json(model.input_offset())},
              {"input_scale", vector_json(model.input_scale())}};
}

spotter::MlpModel model_from_json(const Json& doc) {
  try {
    if (doc.at("activation").get<std::string>() != "tanh") throw InvalidArgument("model: unsupported activation");
    spotter::MlpModel model(doc.at("widths").get<std::vector<int>>());
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (static_cast<Index>(weights.size()) != model.layer_count() || biases.size() != weights.size()) {
      throw InvalidArgument("model: layer count does not match widths");
    }
    for (Index l = 0; l < model.layer_count(); ++l) {
      auto& w = model.weight(l);
      const auto& rows = weights[static_cast<std::size_t>(l)];
      if (static_cast<Index>(rows.size()) != w.rows()) throw InvalidArgument("model: weight shape mismatch");
      for (Index r = 0; r < w.rows(); ++r) {
        const Eigen::VectorXd row = vector_from(rows[static_cast<std::size_t>(r)]);
        if (row.size() != w.cols()) throw InvalidArgument("model: weight shape mismatch");
        w.row(r) = row.transpose();
      }
      const Eigen::VectorXd b = vector_from(biases[static_cast<std::size_t>(l)]);
      if (b.size() != model.bias(l).size()) throw InvalidArgument("model: bias shape mismatch");
      model.bias(l) = b;
    }
    model.set_seed(doc.value("seed", std::uint64_t{0}));
    if (doc.contains("input_offset")) {
      model.set_input_transform(vector_from(doc.at("input_offset")), vector_from(doc.at("input_scale")));
    }
    return model;
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("model: malformed document: ") + e.what());
  }
}

Json coefficients_to_json(const CombinedSpace& space, const Eigen::VectorXd& coeffs) {
  const auto& part = space.partition();
  std::vector<std::pair<double, double>> domain;
  for (Index i = 0; i < part.dim(); ++i) domain.emplace_back(part.domain().lo()[i], part.domain().hi()[i]);
  return Json{{"layout",
               {{"domain", domain},
                {"sections", part.sections()},
                {"degrees", space.poly().degrees},
                {"feature_count", space.feature_count()},
                {"poly_count", space.poly_count()},
                {"block_width", space.block_width()},
                {"segments", part.size()},
                {"order", "segment-major; features then monomials, first axis exponent most significant"}}},
              {"coefficients", vector_json(coeffs)}};
}

std::pair<CombinedSpace, Eigen::VectorXd> coefficients_from_json(const Json& doc) {
  try {
    const auto& layout = doc.at("layout");
    const auto domain = Domain<double>::box(layout.at("domain").get<std::vector<std::pair<double, double>>>());
    CombinedSpace space(partition_domain(domain, layout.at("sections").get<std::vector<int>>()),
                        layout.at("feature_count").get<Index>(), PolySpec{layout.at("degrees").get<std::vector<int>>()});
    Eigen::VectorXd c = vector_from(doc.at("coefficients"));
    if (c.size() != space.column_count()) throw InvalidArgument("coefficients: length does not match the layout");
    return {std::move(space), std::move(c)};
  } catch (const Json::exception& e) {
    throw InvalidArgument(std::string("coefficients: malformed document: ") + e.what());
  }
}

Json metrics_to_json(const Metrics& m) { return Json{{"mse", m.mse}, {"mae", m.mae}, {"max_err", m.max_err}}; }

Json report_to_json(const SolveReport& r) {
  Json doc{{"version", kVersion},
           {"kind", r.kind},
           {"train", optional_metrics(r.train)},
           {"spotter_train", optional_metrics(r.spotter_train)},
           {"test", optional_metrics(r.test)},
           {"spotter_test", optional_metrics(r.spotter_test)},
           {"train_points", r.train_points},
           {"test_points", r.test_points},
           {"spotter",
            {{"initial_loss", r.spotter.initial_loss},
             {"final_loss", r.spotter.final_loss},
             {"epochs", r.spotter.epochs},
             {"reached_target", r.spotter.reached_target},
             {"diverged", r.spotter.diverged},
             {"seconds", r.spotter.seconds}}},
           {"least_squares",
            {{"residual", r.ls_residual},
             {"relative_residual", r.ls_relative_residual},
             {"effective_rank", r.effective_rank},
             {"rows", r.rows},
             {"columns", r.columns}}},
           {"sniper_seconds", r.sniper_seconds},
           {"wall_seconds", r.wall_seconds},
           {"diagnostics", r.diagnostics}};
  if (r.kind == "time") {
    doc["time_stepping"] = {{"steps", r.steps}, {"failed_steps", r.failed_steps}, {"retrains", r.retrains},
                            {"step_relative_residuals", r.history}};
  }
  if (r.kind == "pseudo-time") {
    doc["pseudo_time"] = {{"iterations", r.iterations}, {"converged", r.converged}, {"changes", r.history}};
  }
  if (r.space) {
    doc["sections"] = r.space->partition().sections();
    doc["degrees"] = r.space->poly().degrees;
  }
  return doc;
}

void write_solution_csv(const std::filesystem::path& path, const SolveReport& r) {
  auto out = open_out(path);
  const Index d = r.solution_points.rows();
  const bool exact = r.solution_exact.size() == r.solution_values.size() && r.solution_exact.size() > 0;
  for (Index i = 0; i < d; ++i) out << "x" << i << ",";
  out << "value" << (exact ? ",exact" : "") << "\n";
  for (Index j = 0; j < r.solution_points.cols(); ++j) {
    for (Index i = 0; i < d; ++i) out << r.solution_points(i, j) << ",";
    out << r.solution_values[j];
    if (exact) out << "," << r.solution_exact[j];
    out << "\n";
  }
}

void write_json(const std::filesystem::path& path, const Json& doc) { open_out(path) << doc.dump(2) << "\n"; }

Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return Json::parse(in);
}

void write_run(const std::filesystem::path& dir, const RunConfig& config, const SolveReport& report) {
  std::filesystem::create_directories(dir);
  Json echo = to_json(config);
  echo["version"] = kVersion;
  write_json(dir / "config.echo.json", echo);
  write_json(dir / "report.json", report_to_json(report));
  {
    MetricsRow row;
    row.points = report.train_points;
    if (report.space) row.sections = report.space->partition().sections();
    row.loss = report.spotter.final_loss;
    if (report.train) row.train = *report.train;
    if (report.test) row.test = *report.test;
    row.time_s = report.wall_seconds;
    auto out = open_out(dir / "metrics.csv");
    write_metrics_csv(out, {row});
  }
  write_solution_csv(dir / "solution.csv", report);
  write_json(dir / "model.json", model_to_json(report.model));
  if (report.space) write_json(dir / "coefficients.json", coefficients_to_json(*report.space, report.coeffs));
}

void write_study(const std::filesystem::path& dir, const RunConfig& config, const StudyResult& study) {
  std::filesystem::create_directories(dir);
  Json echo = to_json(config);
  echo["version"] = kVersion;
  write_json(dir / "config.echo.json", echo);
  {
    auto out = open_out(dir / "metrics.csv");
    write_metrics_csv(out, study.rows);
  }
  Json cells = Json::array();
  for (std::size_t i = 0; i < study.rows.size(); ++i) {
    Json cell = study.rows[i].error.empty() ? report_to_json(study.reports[i]) : Json{{"error", study.rows[i].error}};
    cell["sections"] = study.rows[i].sections;
    cells.push_back(std::move(cell));
  }
  write_json(dir / "report.json", Json{{"version", kVersion},
                                       {"problem", config.problem},
                                       {"spotter",
                                        {{"final_loss", study.spotter.final_loss},
                                         {"epochs", study.spotter.epochs},
                                         {"seconds", study.spotter.seconds}}},
                                       {"cells", std::move(cells)}});
  for (std::size_t i = study.rows.size(); i-- > 0;) {
    if (study.rows[i].error.empty()) {
      write_solution_csv(dir / "solution.csv", study.reports[i]);
      break;
    }
  }
}

}  // namespace deepoly
