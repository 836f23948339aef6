#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace steerbandit {

class Policy;

/// Absolute tolerance for comparisons of closed-form quantities.
inline constexpr double kExactTolerance = 1e-12;

/// Per-arm primary and behavioral rewards, validated for shape and
/// finiteness but not for any condition on the scalarization weight.
class RewardTable {
 public:
  /// Throws InvalidArgument unless both sequences have the same length >= 2
  /// and every entry is finite.
  static RewardTable create(std::vector<double> primary, std::vector<double> behavior);

  std::size_t arm_count() const noexcept { return primary_.size(); }
  std::span<const double> primary() const noexcept { return primary_; }
  std::span<const double> behavior() const noexcept { return behavior_; }

 private:
  RewardTable(std::vector<double> primary, std::vector<double> behavior)
      : primary_(std::move(primary)), behavior_(std::move(behavior)) {}

  std::vector<double> primary_;
  std::vector<double> behavior_;
};

/// A K-armed deterministic bandit with primary reward x, behavioral reward y
/// and scalarization weight alpha. Construction enforces
/// alpha > alpha_threshold(rewards), which makes the target arm the unique
/// maximizer of x + alpha * y.
class BanditInstance {
 public:
  static BanditInstance create(RewardTable rewards, double alpha);
  static BanditInstance create(std::vector<double> primary, std::vector<double> behavior,
                               double alpha) {
    return create(RewardTable::create(std::move(primary), std::move(behavior)), alpha);
  }

  const RewardTable& rewards() const noexcept { return rewards_; }
  std::span<const double> primary() const noexcept { return rewards_.primary(); }
  std::span<const double> behavior() const noexcept { return rewards_.behavior(); }
  double alpha() const noexcept { return alpha_; }
  std::size_t arm_count() const noexcept { return rewards_.arm_count(); }
  std::size_t target() const noexcept { return target_; }
  std::span<const double> scalar_rewards() const noexcept { return scalar_; }

 private:
  BanditInstance(RewardTable rewards, double alpha);

  RewardTable rewards_;
  double alpha_;
  std::size_t target_;
  std::vector<double> scalar_;
};

struct ScalarizedSummary {
  std::vector<double> scalar_rewards;
  std::size_t target_arm = 0;
  /// Gap r(i*) - r(i) for every arm, with 0 at the target. Suboptimal gaps
  /// are the entries at indices other than target_arm.
  std::vector<double> gaps;
  double gap_min = 0.0;
  double gap_max = 0.0;
  double range_x = 0.0;
  double range_y = 0.0;
  double conditioning = 0.0;

  double optimal_reward() const { return scalar_rewards[target_arm]; }
};

/// r(i) = x(i) + alpha * y(i).
std::vector<double> scalarize(const RewardTable& rewards, double alpha);
std::vector<double> scalarize(const BanditInstance& instance);

/// Among arms with maximal y, the one with maximal x; ties on x go to the
/// lowest index. Zero-based.
std::size_t target_arm(const RewardTable& rewards);

/// max over {i : y(i) < y(i*)} of max(x(i) - x(i*), 0) / (y(i*) - y(i));
/// zero when that set is empty.
double alpha_threshold(const RewardTable& rewards);

/// Gaps, ranges and the conditioning constant (D_x + alpha D_y) / gap_max.
/// Throws DegenerateInstance when gap_max == 0.
ScalarizedSummary summarize(const BanditInstance& instance);

/// J(pi) = sum_i pi(i) r(i). Throws DimensionMismatch.
double expected_reward(const Policy& policy, const BanditInstance& instance);

/// Policy-weighted mean of an arbitrary per-arm value.
double weighted_mean(std::span<const double> probs, std::span<const double> values);

}  // namespace steerbandit
