#include "steerbandit/advantage.hpp"

#include <cmath>
#include <string>

#include "steerbandit/errors.hpp"

namespace steerbandit {

// --- SteeringPair -----------------------------------------------------------

SteeringPair SteeringPair::create(std::vector<double> plus, std::vector<double> minus) {
  if (plus.size() != minus.size()) {
    throw DimensionMismatch("steering pair sides have different lengths");
  }
  return SteeringPair(Policy::create(std::move(plus)), Policy::create(std::move(minus)));
}

std::vector<double> SteeringPair::mixture() const {
  std::vector<double> m(size());
  for (std::size_t i = 0; i < m.size(); ++i) m[i] = 0.5 * (plus()[i] + minus()[i]);
  return m;
}

double SteeringPair::mixture_error(const Policy& policy) const {
  if (policy.size() != size()) throw DimensionMismatch("steering pair and policy differ in size");
  double worst = 0.0;
  const auto m = mixture();
  for (std::size_t i = 0; i < m.size(); ++i) worst = std::max(worst, std::abs(m[i] - policy[i]));
  return worst;
}

// --- groups -----------------------------------------------------------------

std::vector<double> RolloutGroup::rewards() const {
  std::vector<double> r;
  r.reserve(samples.size());
  for (const Sample& s : samples) r.push_back(s.reward);
  return r;
}

std::vector<int> RolloutGroup::counts(SampleSource source) const {
  std::vector<int> n(arm_count, 0);
  for (const Sample& s : samples) {
    if (s.source == source) ++n[s.arm];
  }
  return n;
}

GroupStats group_stats(std::span<const double> rewards) {
  if (rewards.size() < 2) throw InvalidArgument("group statistics need at least two rewards");
  const double g = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= g;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  return GroupStats{mean, std::sqrt(ss / (g - 1.0))};
}

namespace {

void check_dims(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw DimensionMismatch(std::string(what) + ": " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

void check_group_size(int group_size) {
  if (group_size < 2) throw InvalidArgument("group size must be at least 2");
}

// Both empirical scores reduce to sum over samples on arm i of (r - mean)/std.
std::vector<double> standardized_arm_sums(const RolloutGroup& group) {
  std::vector<double> score(group.arm_count, 0.0);
  const auto rewards = group.rewards();
  const GroupStats stats = group_stats(rewards);
  if (stats.sample_std < kZeroSpread) return score;
  for (const Sample& s : group.samples) score[s.arm] += (s.reward - stats.mean) / stats.sample_std;
  return score;
}

void accumulate(MonteCarloEstimate& est, double& m2, double value) {
  ++est.samples;
  const double delta = value - est.mean;
  est.mean += delta / static_cast<double>(est.samples);
  m2 += delta * (value - est.mean);
}

void finish(MonteCarloEstimate& est, double m2) {
  if (est.samples > 1) {
    const double n = static_cast<double>(est.samples);
    est.std_error = std::sqrt(m2 / (n - 1.0) / n);
  }
}

template <typename Sampler>
LemmaEstimate estimate_lemma(std::size_t arm_count, std::size_t groups, Sampler&& sample) {
  LemmaEstimate est;
  est.numerator.resize(arm_count);
  std::vector<double> m2(arm_count, 0.0);
  double m2_var = 0.0;
  std::vector<double> sums(arm_count);
  for (std::size_t n = 0; n < groups; ++n) {
    const RolloutGroup group = sample();
    const auto rewards = group.rewards();
    const GroupStats stats = group_stats(rewards);
    std::fill(sums.begin(), sums.end(), 0.0);
    for (const Sample& s : group.samples) sums[s.arm] += s.reward - stats.mean;
    for (std::size_t i = 0; i < arm_count; ++i) accumulate(est.numerator[i], m2[i], sums[i]);
    accumulate(est.sample_variance, m2_var, stats.sample_std * stats.sample_std);
  }
  for (std::size_t i = 0; i < arm_count; ++i) finish(est.numerator[i], m2[i]);
  finish(est.sample_variance, m2_var);
  return est;
}

}  // namespace

// --- GRPO -------------------------------------------------------------------

RolloutGroup sample_group_grpo(const Policy& policy, const BanditInstance& instance, int group_size,
                               RandomStream& stream) {
  check_group_size(group_size);
  check_dims(policy.size(), instance.arm_count(), "policy vs instance");
  RolloutGroup group{instance.arm_count(), {}};
  group.samples.reserve(static_cast<std::size_t>(group_size));
  const auto r = instance.scalar_rewards();
  for (int g = 0; g < group_size; ++g) {
    const std::size_t arm = stream.categorical(policy.probs());
    group.samples.push_back({arm, SampleSource::plain, r[arm]});
  }
  return group;
}

std::vector<double> empirical_score_grpo(const RolloutGroup& group) {
  for (const Sample& s : group.samples) {
    if (s.source != SampleSource::plain) {
      throw InvalidArgument("GRPO score expects a group of plain samples");
    }
  }
  return standardized_arm_sums(group);
}

GrpoMoments grpo_moments(const Policy& policy, const BanditInstance& instance) {
  check_dims(policy.size(), instance.arm_count(), "policy vs instance");
  const auto r = instance.scalar_rewards();
  GrpoMoments m;
  m.mu_r = weighted_mean(policy.probs(), r);
  double var = 0.0;
  for (std::size_t i = 0; i < r.size(); ++i) var += policy[i] * (r[i] - m.mu_r) * (r[i] - m.mu_r);
  m.sigma_r = std::sqrt(var);
  return m;
}

std::vector<double> population_numerator_grpo(const Policy& policy, const BanditInstance& instance,
                                              int group_size) {
  check_group_size(group_size);
  const GrpoMoments m = grpo_moments(policy, instance);
  const auto r = instance.scalar_rewards();
  std::vector<double> num(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    num[i] = (group_size - 1) * policy[i] * (r[i] - m.mu_r);
  }
  return num;
}

std::vector<double> population_score_grpo(const Policy& policy, const BanditInstance& instance,
                                          int group_size) {
  const GrpoMoments m = grpo_moments(policy, instance);
  if (!(m.sigma_r > 0.0)) {
    throw DegenerateVariance("policy is supported on arms with equal scalar reward");
  }
  auto score = population_numerator_grpo(policy, instance, group_size);
  for (double& a : score) a /= m.sigma_r;
  return score;
}

// --- VSPO -------------------------------------------------------------------

double VspoMoments::expected_sample_variance(int group_size) const {
  return pooled_var + delta * delta / (4.0 * (group_size - 1));
}

VspoMoments vspo_moments(const SteeringPair& pair, const BanditInstance& instance) {
  check_dims(pair.size(), instance.arm_count(), "steering pair vs instance");
  const auto x = instance.primary();
  const auto y = instance.behavior();
  const double alpha = instance.alpha();
  VspoMoments m;
  m.mu_x_plus = weighted_mean(pair.plus(), x);
  m.mu_x_minus = weighted_mean(pair.minus(), x);
  m.mu_y_plus = weighted_mean(pair.plus(), y);
  m.mu_y_minus = weighted_mean(pair.minus(), y);
  m.mu_x = 0.5 * (m.mu_x_plus + m.mu_x_minus);
  m.mu_y = 0.5 * (m.mu_y_plus + m.mu_y_minus);
  m.mu_plus = m.mu_x_plus + alpha * m.mu_y_plus;
  m.mu_minus = m.mu_x_minus + alpha * m.mu_y_minus;
  m.mu = 0.5 * (m.mu_plus + m.mu_minus);
  m.delta_x = m.mu_x_plus - m.mu_x_minus;
  m.delta_y = m.mu_y_plus - m.mu_y_minus;
  m.delta = m.delta_x + alpha * m.delta_y;
  m.d.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r_plus = x[i] + alpha * m.mu_y_plus;
    const double r_minus = x[i] + alpha * m.mu_y_minus;
    m.pooled_var += 0.5 * pair.plus()[i] * (r_plus - m.mu) * (r_plus - m.mu) +
                    0.5 * pair.minus()[i] * (r_minus - m.mu) * (r_minus - m.mu);
    m.var_plus += pair.plus()[i] * (x[i] - m.mu_x_plus) * (x[i] - m.mu_x_plus);
    m.var_minus += pair.minus()[i] * (x[i] - m.mu_x_minus) * (x[i] - m.mu_x_minus);
    m.d[i] = 0.5 * (pair.plus()[i] - pair.minus()[i]);
  }
  return m;
}

RolloutGroup sample_group_vspo(const SteeringPair& pair, const BanditInstance& instance,
                               int group_size, RandomStream& stream) {
  check_group_size(group_size);
  if (group_size % 2 != 0) throw InvalidArgument("VSPO group size must be even");
  check_dims(pair.size(), instance.arm_count(), "steering pair vs instance");
  const auto x = instance.primary();
  const double shift_plus = instance.alpha() * weighted_mean(pair.plus(), instance.behavior());
  const double shift_minus = instance.alpha() * weighted_mean(pair.minus(), instance.behavior());
  RolloutGroup group{instance.arm_count(), {}};
  group.samples.reserve(static_cast<std::size_t>(group_size));
  const int half = group_size / 2;
  for (int g = 0; g < half; ++g) {
    const std::size_t arm = stream.categorical(pair.plus());
    group.samples.push_back({arm, SampleSource::plus, x[arm] + shift_plus});
  }
  for (int g = 0; g < half; ++g) {
    const std::size_t arm = stream.categorical(pair.minus());
    group.samples.push_back({arm, SampleSource::minus, x[arm] + shift_minus});
  }
  return group;
}

std::vector<double> empirical_score_vspo(const RolloutGroup& group) {
  int plus = 0;
  int minus = 0;
  for (const Sample& s : group.samples) {
    if (s.source == SampleSource::plus) ++plus;
    else if (s.source == SampleSource::minus) ++minus;
    else throw InvalidArgument("VSPO score expects plus/minus tagged samples");
  }
  if (plus != minus) throw InvalidArgument("VSPO group must have equal plus and minus halves");
  return standardized_arm_sums(group);
}

std::vector<double> population_numerator_vspo(const Policy& policy, const SteeringPair& pair,
                                              const BanditInstance& instance, int group_size) {
  check_group_size(group_size);
  check_dims(policy.size(), instance.arm_count(), "policy vs instance");
  if (pair.mixture_error(policy) > 1e-12) {
    throw InvalidArgument("steering pair does not average to the policy");
  }
  const VspoMoments m = vspo_moments(pair, instance);
  const auto x = instance.primary();
  const double contrast = m.delta + instance.alpha() * (group_size - 1) * m.delta_y;
  std::vector<double> num(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    num[i] = (group_size - 1) * policy[i] * (x[i] - m.mu_x) + 0.5 * m.d[i] * contrast;
  }
  return num;
}

std::vector<double> population_score_vspo(const Policy& policy, const SteeringPair& pair,
                                          const BanditInstance& instance, int group_size) {
  auto score = population_numerator_vspo(policy, pair, instance, group_size);
  const double denom =
      std::sqrt(vspo_moments(pair, instance).expected_sample_variance(group_size));
  if (!(denom > 0.0)) throw DegenerateVariance("VSPO score denominator is zero");
  for (double& a : score) a /= denom;
  return score;
}

double popoviciu_bound(double lo, double hi) {
  if (hi < lo) throw InvalidArgument("popoviciu_bound requires hi >= lo");
  return 0.25 * (hi - lo) * (hi - lo);
}

LemmaEstimate estimate_grpo_lemma(const Policy& policy, const BanditInstance& instance,
                                  int group_size, std::size_t groups, RandomStream& stream) {
  return estimate_lemma(instance.arm_count(), groups, [&] {
    return sample_group_grpo(policy, instance, group_size, stream);
  });
}

LemmaEstimate estimate_vspo_lemma(const SteeringPair& pair, const BanditInstance& instance,
                                  int group_size, std::size_t groups, RandomStream& stream) {
  return estimate_lemma(instance.arm_count(), groups, [&] {
    return sample_group_vspo(pair, instance, group_size, stream);
  });
}

}  // namespace steerbandit
