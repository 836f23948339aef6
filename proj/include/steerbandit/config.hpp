#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "steerbandit/bandit.hpp"
#include "steerbandit/latent.hpp"
#include "steerbandit/policy.hpp"
#include "steerbandit/steering.hpp"

namespace steerbandit {

enum class Mode { population, empirical, latent, verify, bounds };
enum class Method { grpo, vspo };

std::string to_string(Mode mode);
std::string to_string(Method method);

/// A named instance with its default initial policy.
struct Preset {
  std::string name;
  BanditInstance instance;
  Policy initial_policy;
};

/// "E1", "E3" or "separable". Throws ConfigError for unknown names.
Preset named_preset(const std::string& name);

struct LatentSettings {
  std::size_t hidden_dim = 8;
  latent::TrainConfig train;
  latent::IntensitySchedule schedule;
  bool normalize_vector = true;
  /// Strength of the planted behavior direction; 0 disables planting.
  double plant_strength = 1.0;
  int seeds = 20;
};

struct Scenario {
  std::string label;
  BanditInstance instance;
  Policy initial_policy;
};

struct RunConfig {
  Mode mode = Mode::population;
  std::vector<Method> methods{Method::grpo};
  /// One entry for an explicit instance or a single preset; the verify
  /// campaign may hold several.
  std::vector<Scenario> scenarios;
  ContrastSpec contrast = TwoSidedSplit{};
  double eta = 1.0;
  int group_size = 2;
  /// Group sizes swept by `verify`; defaults to {group_size} when an
  /// instance is given and {2, 4, 8} for the default campaign.
  std::vector<int> verify_group_sizes;
  double eps_target = 0.01;
  int max_iterations = 50;
  std::uint64_t seed = 1;
  int replications = 20;
  std::size_t groups = 200000;
  /// Randomized draws for the exact-identity suite in `verify`.
  int identity_draws = 1000;
  LatentSettings latent;

  const Scenario& scenario() const { return scenarios.front(); }
};

/// Validates the document against the schema (unknown keys rejected) and
/// builds the configuration. Every failure is a ConfigError.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace steerbandit
