#include "doctest.h"

#include "deepoly/config.hpp"

using namespace deepoly;
using Json = nlohmann::json;

namespace {

std::string config_error(const Json& doc) {
  try {
    parse_config(doc);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("registry defaults") {
  const auto c = parse_config(Json{{"problem", "poisson-case1"}});
  CHECK(c.sections == std::vector<int>{10, 10});
  CHECK(c.degrees == std::vector<int>{5, 5});
  CHECK(c.samples == 5000);
  CHECK(c.hidden == std::vector<int>{12, 32, 32, 25});
  CHECK(c.test_grid == std::vector<int>{50, 50});

  for (const auto& name : problem_names()) {
    if (name == "custom") continue;
    CAPTURE(name);
    const auto d = default_config(name);
    CHECK(d.problem == name);
    CHECK(d.sections.size() == d.domain.size());
    CHECK(d.degrees.size() == d.domain.size());
    CHECK_NOTHROW(parse_config(to_json(d)));
  }
}

TEST_CASE("config errors") {
  SUBCASE("empty custom problem names the missing fields") {
    const auto msg = config_error(Json{{"problem", "custom"}});
    CHECK(msg.find("target") != std::string::npos);
    CHECK(msg.find("domain") != std::string::npos);
  }
  SUBCASE("unknown keys are listed") {
    const auto msg = config_error(Json{{"problem", "fit-1d-smooth"}, {"sectoins", 3}, {"lr", 1}});
    CHECK(msg.find("sectoins") != std::string::npos);
    CHECK(msg.find("lr") != std::string::npos);
  }
  SUBCASE("problem is required") { CHECK(config_error(Json{{"seed", 1}}).find("problem") != std::string::npos); }
  SUBCASE("unknown problem") { CHECK(config_error(Json{{"problem", "heat"}}).find("heat") != std::string::npos); }
  SUBCASE("shape and range checks") {
    CHECK_FALSE(config_error(Json{{"problem", "fit-2d-smooth"}, {"sections", {2}}}).empty());
    CHECK_FALSE(config_error(Json{{"problem", "fit-1d-smooth"}, {"study_sections", {1, 4, 2}}}).empty());
    CHECK_FALSE(config_error(Json{{"problem", "fit-1d-smooth"}, {"domain", {{1.0, 0.0}}}}).empty());
    CHECK_FALSE(config_error(Json{{"problem", "fit-1d-smooth"}, {"seed", "zero"}}).empty());
    CHECK_THROWS_AS(parse_config(Json::array()), ConfigError);
  }
}

TEST_CASE("overrides are echoed") {
  const auto c = parse_config(Json{{"problem", "fit-1d-smooth"}, {"seed", 42}, {"sections", {8}}});
  CHECK(c.seed == 42);
  const Json echo = to_json(c);
  CHECK(echo.at("seed") == 42);
  CHECK(echo.at("sections") == Json{8});
  CHECK(echo.at("problem") == "fit-1d-smooth");
  // The echo is a complete config: parsing it gives the same document back.
  CHECK(to_json(parse_config(echo)) == echo);
}
