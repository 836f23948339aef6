#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "steerbandit/bandit.hpp"
#include "steerbandit/random.hpp"

namespace steerbandit::latent {

// A tiny feature -> hidden -> logit policy standing in for a language model.
// Tokens are the K arms plus a start token (index K). The hidden state of a
// token is tanh(U phi(token)), with phi one-hot; the action distribution is
// softmax(W h_start). Steering adds beta * v to h_start before the unembedding,
// so a direction built from per-arm activations shifts arms differentially.

/// Trainable parameters. Both matrices are row-major.
struct LatentParams {
  std::size_t arm_count = 0;
  std::size_t hidden_dim = 0;
  /// hidden_dim x (arm_count + 1).
  std::vector<double> encode;
  /// arm_count x hidden_dim.
  std::vector<double> unembed;

  std::size_t feature_dim() const noexcept { return arm_count + 1; }
  std::size_t start_token() const noexcept { return arm_count; }
  double& encode_at(std::size_t row, std::size_t col) { return encode[row * feature_dim() + col]; }
  double encode_at(std::size_t row, std::size_t col) const {
    return encode[row * feature_dim() + col];
  }
  double& unembed_at(std::size_t arm, std::size_t j) { return unembed[arm * hidden_dim + j]; }
  double unembed_at(std::size_t arm, std::size_t j) const { return unembed[arm * hidden_dim + j]; }
  std::size_t parameter_count() const noexcept { return encode.size() + unembed.size(); }
  /// Flat view index p: encode entries first, then unembed.
  double& parameter(std::size_t p) {
    return p < encode.size() ? encode[p] : unembed[p - encode.size()];
  }
  double parameter(std::size_t p) const {
    return p < encode.size() ? encode[p] : unembed[p - encode.size()];
  }
  bool finite() const;
};

struct LatentPolicy {
  LatentParams params;
  /// Frozen copy used as pi_ref in the KL term.
  LatentParams reference;

  /// Explicit parameters; the reference is a copy. Throws InvalidArgument on
  /// shape mismatch or non-finite entries.
  static LatentPolicy from_params(std::size_t arm_count, std::size_t hidden_dim,
                                  std::vector<double> encode, std::vector<double> unembed);
};

struct InitOptions {
  std::size_t hidden_dim = 8;
  /// Encoder entries are uniform in [-init_range, init_range].
  double init_range = 0.5;
  /// When non-empty (length K), adds +plant_strength along hidden unit 0 to
  /// the encoder column of every arm with maximal behavior, and
  /// -plant_strength to the others. Makes the behavior linearly separable
  /// in activation space.
  std::vector<double> planted_behavior;
  double plant_strength = 1.0;
};

/// Random encoder from the stream; unembedding rows are initialized to the
/// per-arm activations (tied embeddings), so logits read out similarity to
/// each arm's representation.
LatentPolicy random_policy(std::size_t arm_count, const InitOptions& options,
                           RandomStream& stream);

/// K = 4 with x = (1, 1, 0, 0) and y = (0, 1, 0, 1): behavior is independent
/// of the primary reward and separable in activation space.
RewardTable separable_rewards();
LatentPolicy separable_policy(std::uint64_t seed, std::size_t hidden_dim = 8);

struct SteeringVector {
  std::vector<double> v;
  bool normalized = false;
};

/// tanh(U phi(token)); token == arm_count is the start token. Throws
/// InvalidArgument when token > arm_count.
std::vector<double> activation(const LatentParams& params, std::size_t token);

/// Mean activation over positive arms minus mean over negative arms,
/// optionally scaled to unit norm. A zero difference is returned
/// unnormalized with normalized == false.
SteeringVector build_vector(const LatentParams& params, std::span<const std::size_t> positive,
                            std::span<const std::size_t> negative, bool normalize);

/// softmax(W (h_start + beta v)).
std::vector<double> steered_distribution(const LatentParams& params, const SteeringVector& v,
                                         double beta);
std::vector<double> base_distribution(const LatentParams& params);

/// || (p(+b) + p(-b)) / 2 - p(0) ||_1.
double mixture_deviation(const LatentParams& params, const SteeringVector& v, double b);

struct IntensitySchedule {
  std::vector<double> intensities{-0.3, -0.15, 0.0, 0.15, 0.3};
  double behavior_weight = 1.0;

  int group_size() const noexcept { return static_cast<int>(intensities.size()); }
};

struct LatentSample {
  std::size_t arm = 0;
  double beta = 0.0;
  double reward = 0.0;
};

/// One draw per intensity from the steered distribution, rewarded
/// x(arm) + behavior_weight * beta.
std::vector<LatentSample> rollout_group(const LatentParams& params, const SteeringVector& v,
                                        const IntensitySchedule& schedule,
                                        const RewardTable& rewards, RandomStream& stream);

/// (r - mean) / std with Bessel correction; zeros when std < 1e-12.
std::vector<double> group_advantages(std::span<const double> rewards);

struct TrainConfig {
  double learning_rate = 0.5;
  double clip_ratio = 0.2;
  double kl_weight = 0.0;
  int iterations = 500;
  std::uint64_t seed = 1;
  /// Gradient steps taken on each sampled group (theta_old fixed).
  int updates_per_group = 1;

  void validate() const;
};

struct LossAndGrad {
  double loss = 0.0;
  LatentParams grad;
};

/// Clipped surrogate with unsteered ratios pi_theta(a) / pi_old(a), plus
/// kl_weight * KL(pi_theta || pi_ref), and its analytic gradient.
LossAndGrad surrogate_loss_and_grad(const LatentParams& params, const LatentParams& old_params,
                                    const LatentParams& reference,
                                    std::span<const LatentSample> group,
                                    std::span<const double> advantages, const TrainConfig& config);

struct TrainRecord {
  int iteration = 0;
  double mean_x = 0.0;
  double mean_y = 0.0;
  double entropy = 0.0;
  std::vector<double> probs;
};

struct TrainResult {
  std::vector<TrainRecord> trajectory;
  LatentPolicy final_policy;
  /// Pearson correlation over all rollouts between beta_g and the mean
  /// behavior E_{steered(beta_g)}[y] at sampling time.
  double behavior_proxy_correlation = 0.0;
};

/// The steering vector is fixed throughout. Each iteration samples a steered
/// group, computes rewards and advantages and updates the unsteered policy;
/// metrics are recorded under the unsteered distribution.
TrainResult train(const LatentPolicy& policy, const RewardTable& rewards, const SteeringVector& v,
                  const IntensitySchedule& schedule, const TrainConfig& config);

/// Spearman rank correlation with average ranks for ties.
double spearman(std::span<const double> a, std::span<const double> b);
double pearson(std::span<const double> a, std::span<const double> b);

}  // namespace steerbandit::latent
