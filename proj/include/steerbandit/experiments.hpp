#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "steerbandit/config.hpp"
#include "steerbandit/steering.hpp"

namespace steerbandit {

struct TrajectoryRecord {
  int t = 0;
  double J = 0.0;
  std::vector<double> probs;
  /// VSPO only.
  std::optional<double> gamma_t;
  std::optional<double> delta_t;
  std::optional<bool> cond2_ok;
  /// Empirical runs: seed of the stream that drew this step's group.
  std::optional<std::uint64_t> group_seed;

  bool operator==(const TrajectoryRecord&) const = default;
};

struct PopulationRun {
  Method method = Method::grpo;
  std::vector<TrajectoryRecord> records;
  double optimal_reward = 0.0;
  /// First t with J(pi_t) >= r(i*) - eps.
  std::optional<int> hitting_time;
  /// Stopped early because the score's variance vanished.
  bool degenerate_stop = false;
  /// Steps whose soft update raised some entry to the support floor.
  int floored_steps = 0;

  /// Largest relative error of the per-step log-ratio recursion over
  /// unfloored steps, and how many steps were checked.
  double max_recursion_error = 0.0;
  int recursion_steps = 0;

  /// VSPO: minimum gamma_t and whether every cond2 held, over the steps
  /// taken before the hitting time (or all steps if never hit).
  double min_gamma = 0.0;
  bool certificate_held = true;

  /// A-priori bound; for VSPO evaluated at min_gamma.
  IterationBound bound;
  bool within_bound = false;
};

/// Iterates the soft update with the method's population score. For VSPO the
/// pair and certificate are re-derived from the contrast spec every step.
PopulationRun run_population(const RunConfig& config, const Scenario& scenario, Method method);

struct ReplicationTrace {
  int replication = 0;
  std::uint64_t seed = 0;
  std::vector<TrajectoryRecord> records;
};

struct QuantileRow {
  int t = 0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
};

struct EmpiricalRun {
  Method method = Method::grpo;
  std::vector<ReplicationTrace> replications;
  std::vector<QuantileRow> summary;
  /// Final pi(i*) per replication.
  std::vector<double> final_target_mass;
  double median_final_target_mass = 0.0;
};

/// Replication r uses the stream seeded mix_seed(seed, r); step t of that
/// replication draws its group from mix_seed(replication seed, t).
EmpiricalRun run_empirical(const RunConfig& config, const Scenario& scenario, Method method);

struct VerifyCheck {
  std::string name;
  double estimate = 0.0;
  double target = 0.0;
  /// Monte Carlo standard error; for exact identities tolerance / 3, so that
  /// |z| <= 3 is exactly the tolerance test.
  double std_error = 0.0;
  double z = 0.0;
  bool pass = false;
  bool hard_fail = false;
  bool exact = false;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool low_power = false;
  std::vector<std::string> warnings;

  bool all_pass() const;
  int failures() const;
};

/// Monte Carlo checks of the GRPO/VSPO population identities for every
/// scenario and group size, plus the exact identities over randomized draws.
VerifyReport verify_lemmas(const RunConfig& config);

/// Monte Carlo part only, for one scenario and group size.
void append_monte_carlo_checks(VerifyReport& report, const Scenario& scenario,
                               const ContrastSpec& contrast, int group_size, std::size_t groups,
                               std::uint64_t seed);

/// Exact identities over `draws` random (instance, policy, contrast) draws.
void append_identity_checks(VerifyReport& report, int draws, std::uint64_t seed);

/// Bound certificate for the scenario's initial policy.
nlohmann::json compute_bounds(const RunConfig& config, const Scenario& scenario);

struct LatentSeedResult {
  int index = 0;
  std::uint64_t seed = 0;
  double initial_x = 0.0;
  double initial_y = 0.0;
  double final_x = 0.0;
  double final_y = 0.0;
  /// Spearman(beta, E_steered(beta)[y]) over the schedule at construction.
  double steering_spearman = 0.0;
  /// Mixture deviation at b = 0.1 and b = 0.05.
  double mixture_deviation_b = 0.0;
  double mixture_deviation_half_b = 0.0;
  double behavior_proxy_correlation = 0.0;
  latent::TrainResult train;
};

struct LatentRun {
  std::vector<LatentSeedResult> seeds;
  double median_delta_y = 0.0;
  double median_delta_x = 0.0;
};

LatentRun run_latent(const RunConfig& config);

double median(std::vector<double> values);
/// Linear-interpolation quantile (q in [0, 1]).
double quantile(std::vector<double> values, double q);

nlohmann::json to_json(const VerifyReport& report);
nlohmann::json to_json(const PopulationRun& run);
nlohmann::json to_json(const EmpiricalRun& run);
nlohmann::json to_json(const LatentRun& run);

}  // namespace steerbandit
