#include "doctest.h"
#include "steerbandit/config.hpp"
#include "steerbandit/errors.hpp"

using namespace steerbandit;
using nlohmann::json;

TEST_CASE("presets") {
  const auto e1 = named_preset("E1");
  CHECK(e1.instance.target() == 1);
  CHECK(e1.initial_policy[0] == doctest::Approx(1.0 / 3));
  const auto e3 = named_preset("E3");
  CHECK(e3.initial_policy[0] == 0.3);
  CHECK(e3.instance.alpha() == 1.0);
  CHECK(named_preset("separable").instance.arm_count() == 4);
  CHECK_THROWS_AS(named_preset("E2"), ConfigError);
}

TEST_CASE("minimal configs") {
  const auto c = parse_config(json::parse(R"({"mode": "population", "preset": "E3"})"));
  CHECK(c.mode == Mode::population);
  REQUIRE(c.scenarios.size() == 1);
  CHECK(c.scenario().label == "E3");
  CHECK(c.methods == std::vector<Method>{Method::grpo});
  CHECK(c.eta == 1.0);

  const auto v = parse_config(json::parse(R"({"mode": "verify"})"));
  CHECK(v.scenarios.size() == 2);
  CHECK(v.verify_group_sizes == std::vector<int>{2, 4, 8});
  CHECK(v.groups == 200000);
}

TEST_CASE("explicit instance, policy and contrast") {
  const auto c = parse_config(json::parse(R"({
    "mode": "empirical", "method": ["grpo", "vspo"],
    "instance": {"x": [1.0, 0.0], "y": [0.0, 1.0], "alpha": 2.0},
    "initial_policy": [0.4, 0.6],
    "contrast": {"kind": "custom", "c": [-0.6, 0.4]},
    "eta": 0.5, "G": 4, "eps_target": 0.001, "max_iterations": 10, "seed": 9, "replications": 3
  })"));
  CHECK(c.methods.size() == 2);
  CHECK(c.scenario().instance.alpha() == 2.0);
  CHECK(c.scenario().initial_policy[1] == 0.6);
  CHECK(std::holds_alternative<CustomContrast>(c.contrast));
  CHECK(c.group_size == 4);
  CHECK(c.seed == 9);
}

TEST_CASE("config errors") {
  const char* bad[] = {
      R"({"mode": "population", "preset": "E3", "learning_rate": 1})",
      R"({"mode": "sideways"})",
      R"({"mode": "population", "preset": "E3", "method": "ppo"})",
      R"({"mode": "population", "instance": {"x": [1, 0], "y": [0, 1], "alpha": 0.5}})",
      R"({"mode": "population", "instance": {"x": [1, 0], "y": [0, 1]}})",
      R"({"mode": "population", "preset": "E3", "initial_policy": [0.5, 0.5]})",
      R"({"mode": "population", "preset": "E3", "eta": -1})",
      R"({"mode": "population", "preset": "E3", "G": 1})",
      R"({"mode": "population", "preset": "E3", "contrast": {"kind": "y_tilt", "strength": 2}})",
      R"({"mode": "population", "preset": "E3", "contrast": {"kind": "wobble"}})",
      R"({"mode": "latent", "latent": {"hidden_dim": 0}})",
      R"({"mode": "latent", "latent": {"train": {"bogus": 1}}})",
      R"([1, 2, 3])",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(json::parse(text)), ConfigError);
  }
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
