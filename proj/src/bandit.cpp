#include "steerbandit/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "steerbandit/errors.hpp"
#include "steerbandit/policy.hpp"

namespace steerbandit {

RewardTable RewardTable::create(std::vector<double> primary, std::vector<double> behavior) {
  if (primary.size() != behavior.size()) {
    throw InvalidArgument("primary and behavior rewards differ in length (" +
                          std::to_string(primary.size()) + " vs " +
                          std::to_string(behavior.size()) + ")");
  }
  if (primary.size() < 2) throw InvalidArgument("a bandit needs at least two arms");
  for (std::size_t i = 0; i < primary.size(); ++i) {
    if (!std::isfinite(primary[i]) || !std::isfinite(behavior[i])) {
      throw InvalidArgument("non-finite reward at arm " + std::to_string(i + 1));
    }
  }
  return RewardTable(std::move(primary), std::move(behavior));
}

BanditInstance::BanditInstance(RewardTable rewards, double alpha)
    : rewards_(std::move(rewards)),
      alpha_(alpha),
      target_(target_arm(rewards_)),
      scalar_(scalarize(rewards_, alpha)) {}

BanditInstance BanditInstance::create(RewardTable rewards, double alpha) {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw InvalidArgument("alpha must be a finite nonnegative number");
  }
  const double threshold = alpha_threshold(rewards);
  // Equality up to rounding counts as equality.
  if (!(alpha > threshold + kExactTolerance * std::max(1.0, threshold))) {
    throw InvalidArgument("alpha = " + std::to_string(alpha) +
                          " does not exceed the uniqueness threshold " +
                          std::to_string(threshold));
  }
  BanditInstance instance(std::move(rewards), alpha);
  const auto r = instance.scalar_rewards();
  for (std::size_t i = 0; i < instance.arm_count(); ++i) {
    if (i != instance.target() && !(r[i] < r[instance.target()])) {
      throw DegenerateInstance("arm " + std::to_string(i + 1) +
                               " ties the target arm's scalar reward");
    }
  }
  return instance;
}

std::vector<double> scalarize(const RewardTable& rewards, double alpha) {
  std::vector<double> r(rewards.arm_count());
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = rewards.primary()[i] + alpha * rewards.behavior()[i];
  }
  return r;
}

std::vector<double> scalarize(const BanditInstance& instance) {
  return scalarize(instance.rewards(), instance.alpha());
}

std::size_t target_arm(const RewardTable& rewards) {
  const auto x = rewards.primary();
  const auto y = rewards.behavior();
  const double y_max = *std::max_element(y.begin(), y.end());
  std::size_t best = rewards.arm_count();
  for (std::size_t i = 0; i < rewards.arm_count(); ++i) {
    if (y[i] != y_max) continue;
    if (best == rewards.arm_count() || x[i] > x[best]) best = i;
  }
  return best;
}

double alpha_threshold(const RewardTable& rewards) {
  const auto x = rewards.primary();
  const auto y = rewards.behavior();
  const std::size_t star = target_arm(rewards);
  double threshold = 0.0;
  for (std::size_t i = 0; i < rewards.arm_count(); ++i) {
    if (!(y[i] < y[star])) continue;
    threshold = std::max(threshold, std::max(x[i] - x[star], 0.0) / (y[star] - y[i]));
  }
  return threshold;
}

ScalarizedSummary summarize(const BanditInstance& instance) {
  ScalarizedSummary s;
  s.scalar_rewards = scalarize(instance);
  s.target_arm = instance.target();
  const auto& r = s.scalar_rewards;
  s.gaps.assign(r.size(), 0.0);
  bool first = true;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == s.target_arm) continue;
    s.gaps[i] = r[s.target_arm] - r[i];
    if (first) {
      s.gap_min = s.gap_max = s.gaps[i];
      first = false;
    } else {
      s.gap_min = std::min(s.gap_min, s.gaps[i]);
      s.gap_max = std::max(s.gap_max, s.gaps[i]);
    }
  }
  const auto x = instance.primary();
  const auto y = instance.behavior();
  const auto [x_lo, x_hi] = std::minmax_element(x.begin(), x.end());
  const auto [y_lo, y_hi] = std::minmax_element(y.begin(), y.end());
  s.range_x = *x_hi - *x_lo;
  s.range_y = *y_hi - *y_lo;
  if (!(s.gap_max > 0.0)) {
    throw DegenerateInstance("all arms share the optimal scalar reward; conditioning undefined");
  }
  s.conditioning = (s.range_x + instance.alpha() * s.range_y) / s.gap_max;
  return s;
}

double weighted_mean(std::span<const double> probs, std::span<const double> values) {
  if (probs.size() != values.size()) {
    throw DimensionMismatch("policy has " + std::to_string(probs.size()) +
                            " arms but values have " + std::to_string(values.size()));
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) acc += probs[i] * values[i];
  return acc;
}

double expected_reward(const Policy& policy, const BanditInstance& instance) {
  return weighted_mean(policy.probs(), instance.scalar_rewards());
}

}  // namespace steerbandit
