#include "doctest.h"

#include "deepoly/io.hpp"

#include <fstream>
#include <sstream>

using namespace deepoly;

TEST_CASE("model JSON round trip") {
  const auto model = make_spotter(Domain<double>::box({{-2.0, 3.0}, {0.0, 1.0}}), {5, 4}, 9);
  const auto back = model_from_json(nlohmann::json::parse(model_to_json(model).dump()));
  CHECK(back.widths() == model.widths());
  CHECK(back.seed() == model.seed());
  for (Index l = 0; l < model.layer_count(); ++l) {
    CHECK(back.weight(l) == model.weight(l));
    CHECK(back.bias(l) == model.bias(l));
  }
  CHECK(back.input_offset() == model.input_offset());
  CHECK(back.input_scale() == model.input_scale());

  auto doc = model_to_json(model);
  doc["activation"] = "relu";
  CHECK_THROWS_AS(model_from_json(doc), InvalidArgument);
  doc = model_to_json(model);
  doc["weights"][0].erase(0);
  CHECK_THROWS_AS(model_from_json(doc), InvalidArgument);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::object()), InvalidArgument);
}

TEST_CASE("coefficient JSON round trip") {
  const CombinedSpace space(partition_domain(Domain<double>::box({{0.0, 1.0}, {-1.0, 1.0}}), {2, 3}), 4,
                            PolySpec{{2, 1}});
  const Eigen::VectorXd c = Eigen::VectorXd::LinSpaced(space.column_count(), -1.0, 1.0);
  const auto [back, coeffs] = coefficients_from_json(nlohmann::json::parse(coefficients_to_json(space, c).dump()));
  CHECK(coeffs == c);
  CHECK(back.column_count() == space.column_count());
  CHECK(back.partition().sections() == space.partition().sections());
  CHECK(back.poly().degrees == space.poly().degrees);

  auto doc = coefficients_to_json(space, c);
  doc["coefficients"].erase(0);
  CHECK_THROWS_AS(coefficients_from_json(doc), InvalidArgument);
}

TEST_CASE("run directory") {
  RunConfig c = default_config("fit-1d-smooth");
  c.samples = 100;
  c.hidden = {4};
  c.max_epochs = 20;
  c.sections = {2};
  c.test_grid = {11};
  const auto report = run_problem(c);
  const auto dir = std::filesystem::temp_directory_path() / "deepoly_io_test";
  std::filesystem::remove_all(dir);
  write_run(dir, c, report);
  for (const char* f : {"config.echo.json", "report.json", "metrics.csv", "solution.csv", "model.json",
                        "coefficients.json"}) {
    CAPTURE(f);
    CHECK(std::filesystem::exists(dir / f));
  }
  const auto echo = read_json(dir / "config.echo.json");
  CHECK(echo.at("version") == kVersion);
  CHECK(echo.at("seed") == c.seed);

  std::ifstream metrics(dir / "metrics.csv");
  std::string line;
  std::getline(metrics, line);
  CHECK(line == kMetricsHeader);

  std::ifstream solution(dir / "solution.csv");
  std::getline(solution, line);
  CHECK(line == "x0,value,exact");
  int rows = 0;
  while (std::getline(solution, line)) ++rows;
  CHECK(rows == report.solution_points.cols());

  // Reloaded model and coefficients evaluate to the stored solution.
  const auto model = model_from_json(read_json(dir / "model.json"));
  const auto [space, coeffs] = coefficients_from_json(read_json(dir / "coefficients.json"));
  const Eigen::VectorXd v = evaluate(space, coeffs, model, report.solution_points, {0});
  CHECK((v - report.solution_values).cwiseAbs().maxCoeff() <= 1e-12);
  std::filesystem::remove_all(dir);
}
