#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "steerbandit/bandit.hpp"
#include "steerbandit/policy.hpp"
#include "steerbandit/random.hpp"
#include "steerbandit/steering_pair.hpp"

namespace steerbandit {

/// Group standard deviations below this are treated as zero and every
/// score in the group is 0.
inline constexpr double kZeroSpread = 1e-12;

enum class SampleSource { plain, plus, minus };

struct Sample {
  std::size_t arm = 0;
  SampleSource source = SampleSource::plain;
  double reward = 0.0;
};

struct RolloutGroup {
  std::size_t arm_count = 0;
  std::vector<Sample> samples;

  int group_size() const noexcept { return static_cast<int>(samples.size()); }
  std::vector<double> rewards() const;
  /// N(i) restricted to one source tag.
  std::vector<int> counts(SampleSource source) const;
};

struct GroupStats {
  double mean = 0.0;
  /// Bessel-corrected (1/(G-1)) standard deviation.
  double sample_std = 0.0;
};

GroupStats group_stats(std::span<const double> rewards);

// ---------------------------------------------------------------------------
// GRPO

/// G i.i.d. draws from the policy, each rewarded with its scalarized reward.
RolloutGroup sample_group_grpo(const Policy& policy, const BanditInstance& instance, int group_size,
                               RandomStream& stream);

/// A(i) = N(i) (r_i - mean) / std over a plain group; zeros when std < kZeroSpread.
std::vector<double> empirical_score_grpo(const RolloutGroup& group);

struct GrpoMoments {
  double mu_r = 0.0;
  double sigma_r = 0.0;
};

GrpoMoments grpo_moments(const Policy& policy, const BanditInstance& instance);

/// E[N(i)(r_i - mean)] = (G-1) pi(i) (r(i) - mu_r).
std::vector<double> population_numerator_grpo(const Policy& policy, const BanditInstance& instance,
                                              int group_size);

/// (G-1) pi(i) (r(i) - mu_r) / sigma_r. Throws DegenerateVariance when sigma_r == 0.
std::vector<double> population_score_grpo(const Policy& policy, const BanditInstance& instance,
                                          int group_size);

// ---------------------------------------------------------------------------
// VSPO

struct VspoMoments {
  double mu_x_plus = 0.0;
  double mu_x_minus = 0.0;
  double mu_y_plus = 0.0;
  double mu_y_minus = 0.0;
  double mu_x = 0.0;
  double mu_y = 0.0;
  /// mu^± = mu_x^± + alpha mu_y^±, mu = (mu^+ + mu^-)/2.
  double mu_plus = 0.0;
  double mu_minus = 0.0;
  double mu = 0.0;
  double delta_x = 0.0;
  double delta_y = 0.0;
  double delta = 0.0;
  /// v^2: shaped rewards of both halves pooled around mu.
  double pooled_var = 0.0;
  /// Within-half variances (sigma^±)^2 around mu^±.
  double var_plus = 0.0;
  double var_minus = 0.0;
  /// d(i) = (pi+(i) - pi-(i)) / 2.
  std::vector<double> d;

  /// E[sample variance] = v^2 + delta^2 / (4 (G - 1)).
  double expected_sample_variance(int group_size) const;
};

VspoMoments vspo_moments(const SteeringPair& pair, const BanditInstance& instance);

/// Half the group from pi+ with reward x + alpha mu_y^+, half from pi- with
/// reward x + alpha mu_y^-. Throws InvalidArgument for odd G.
RolloutGroup sample_group_vspo(const SteeringPair& pair, const BanditInstance& instance,
                               int group_size, RandomStream& stream);

/// Sum over plus and minus samples of (shaped reward - mean) / std, by arm.
std::vector<double> empirical_score_vspo(const RolloutGroup& group);

/// (G-1) pi(i) (x(i) - mu_x) + (d(i)/2) (delta + alpha (G-1) delta_y).
std::vector<double> population_numerator_vspo(const Policy& policy, const SteeringPair& pair,
                                              const BanditInstance& instance, int group_size);

/// Numerator above over sqrt(v^2 + delta^2/(4(G-1))). Throws
/// DegenerateVariance when the denominator is zero and InvalidArgument when
/// the pair does not average to the policy.
std::vector<double> population_score_vspo(const Policy& policy, const SteeringPair& pair,
                                          const BanditInstance& instance, int group_size);

/// Popoviciu: Var(X) <= (hi - lo)^2 / 4 for X in [lo, hi].
double popoviciu_bound(double lo, double hi);

// ---------------------------------------------------------------------------
// Monte Carlo estimates of the population identities

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

struct LemmaEstimate {
  /// Per arm: mean over groups of sum_{samples on arm i} (r - mean).
  std::vector<MonteCarloEstimate> numerator;
  /// Mean over groups of the Bessel-corrected sample variance.
  MonteCarloEstimate sample_variance;
};

LemmaEstimate estimate_grpo_lemma(const Policy& policy, const BanditInstance& instance,
                                  int group_size, std::size_t groups, RandomStream& stream);

LemmaEstimate estimate_vspo_lemma(const SteeringPair& pair, const BanditInstance& instance,
                                  int group_size, std::size_t groups, RandomStream& stream);

}  // namespace steerbandit
