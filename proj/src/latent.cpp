#include "steerbandit/latent.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "steerbandit/errors.hpp"

namespace steerbandit::latent {

namespace {

std::vector<double> softmax(std::vector<double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  double total = 0.0;
  for (double& v : z) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : z) v /= total;
  return z;
}

std::vector<double> logits(const LatentParams& p, std::span<const double> hidden) {
  std::vector<double> z(p.arm_count, 0.0);
  for (std::size_t a = 0; a < p.arm_count; ++a) {
    for (std::size_t j = 0; j < p.hidden_dim; ++j) z[a] += p.unembed_at(a, j) * hidden[j];
  }
  return z;
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

LatentParams zeros_like(const LatentParams& p) {
  LatentParams z = p;
  std::fill(z.encode.begin(), z.encode.end(), 0.0);
  std::fill(z.unembed.begin(), z.unembed.end(), 0.0);
  return z;
}

}  // namespace

bool LatentParams::finite() const {
  const auto ok = [](double v) { return std::isfinite(v); };
  return std::all_of(encode.begin(), encode.end(), ok) &&
         std::all_of(unembed.begin(), unembed.end(), ok);
}

LatentPolicy LatentPolicy::from_params(std::size_t arm_count, std::size_t hidden_dim,
                                       std::vector<double> encode, std::vector<double> unembed) {
  if (arm_count < 2 || hidden_dim == 0) {
    throw InvalidArgument("latent policy needs at least two arms and one hidden unit");
  }
  LatentParams p{arm_count, hidden_dim, std::move(encode), std::move(unembed)};
  if (p.encode.size() != hidden_dim * (arm_count + 1) || p.unembed.size() != arm_count * hidden_dim) {
    throw InvalidArgument("latent parameter matrices have the wrong shape");
  }
  if (!p.finite()) throw InvalidArgument("latent parameters must be finite");
  return LatentPolicy{p, p};
}

LatentPolicy random_policy(std::size_t arm_count, const InitOptions& options,
                           RandomStream& stream) {
  const std::size_t m = options.hidden_dim;
  std::vector<double> encode(m * (arm_count + 1));
  for (double& u : encode) u = stream.uniform(-options.init_range, options.init_range);
  LatentPolicy policy =
      LatentPolicy::from_params(arm_count, m, std::move(encode), std::vector<double>(arm_count * m));
  LatentParams& p = policy.params;
  if (!options.planted_behavior.empty()) {
    if (options.planted_behavior.size() != arm_count) {
      throw DimensionMismatch("planted behavior must have one entry per arm");
    }
    const double top =
        *std::max_element(options.planted_behavior.begin(), options.planted_behavior.end());
    for (std::size_t a = 0; a < arm_count; ++a) {
      p.encode_at(0, a) +=
          options.planted_behavior[a] == top ? options.plant_strength : -options.plant_strength;
    }
  }
  for (std::size_t a = 0; a < arm_count; ++a) {
    const auto h = activation(p, a);
    for (std::size_t j = 0; j < m; ++j) p.unembed_at(a, j) = h[j];
  }
  policy.reference = p;
  return policy;
}

RewardTable separable_rewards() {
  return RewardTable::create({1.0, 1.0, 0.0, 0.0}, {0.0, 1.0, 0.0, 1.0});
}

LatentPolicy separable_policy(std::uint64_t seed, std::size_t hidden_dim) {
  const RewardTable rewards = separable_rewards();
  InitOptions options;
  options.hidden_dim = hidden_dim;
  options.planted_behavior.assign(rewards.behavior().begin(), rewards.behavior().end());
  RandomStream stream(seed);
  return random_policy(rewards.arm_count(), options, stream);
}

std::vector<double> activation(const LatentParams& params, std::size_t token) {
  if (token > params.arm_count) {
    throw InvalidArgument("token " + std::to_string(token) + " out of range");
  }
  std::vector<double> h(params.hidden_dim);
  for (std::size_t j = 0; j < params.hidden_dim; ++j) h[j] = std::tanh(params.encode_at(j, token));
  return h;
}

SteeringVector build_vector(const LatentParams& params, std::span<const std::size_t> positive,
                            std::span<const std::size_t> negative, bool normalize) {
  if (positive.empty() || negative.empty()) {
    throw InvalidArgument("steering vector needs nonempty positive and negative sets");
  }
  SteeringVector out;
  out.v.assign(params.hidden_dim, 0.0);
  const auto add_mean = [&](std::span<const std::size_t> arms, double sign) {
    for (std::size_t arm : arms) {
      if (arm >= params.arm_count) throw InvalidArgument("steering example arm out of range");
      const auto h = activation(params, arm);
      for (std::size_t j = 0; j < h.size(); ++j) {
        out.v[j] += sign * h[j] / static_cast<double>(arms.size());
      }
    }
  };
  add_mean(positive, 1.0);
  add_mean(negative, -1.0);
  if (normalize) {
    const double norm = std::sqrt(dot(out.v, out.v));
    if (norm > 0.0) {
      for (double& v : out.v) v /= norm;
      out.normalized = true;
    }
  }
  return out;
}

std::vector<double> steered_distribution(const LatentParams& params, const SteeringVector& v,
                                         double beta) {
  if (v.v.size() != params.hidden_dim) {
    throw DimensionMismatch("steering vector length differs from hidden_dim");
  }
  auto h = activation(params, params.start_token());
  if (beta != 0.0) {
    for (std::size_t j = 0; j < h.size(); ++j) h[j] += beta * v.v[j];
  }
  return softmax(logits(params, h));
}

std::vector<double> base_distribution(const LatentParams& params) {
  return softmax(logits(params, activation(params, params.start_token())));
}

double mixture_deviation(const LatentParams& params, const SteeringVector& v, double b) {
  const auto plus = steered_distribution(params, v, b);
  const auto minus = steered_distribution(params, v, -b);
  const auto base = base_distribution(params);
  double dev = 0.0;
  for (std::size_t a = 0; a < base.size(); ++a) dev += std::abs(0.5 * (plus[a] + minus[a]) - base[a]);
  return dev;
}

std::vector<LatentSample> rollout_group(const LatentParams& params, const SteeringVector& v,
                                        const IntensitySchedule& schedule,
                                        const RewardTable& rewards, RandomStream& stream) {
  if (rewards.arm_count() != params.arm_count) {
    throw DimensionMismatch("reward table and latent policy differ in arm count");
  }
  std::vector<LatentSample> group;
  group.reserve(schedule.intensities.size());
  for (double beta : schedule.intensities) {
    const auto probs = steered_distribution(params, v, beta);
    const std::size_t arm = stream.categorical(probs);
    group.push_back({arm, beta, rewards.primary()[arm] + schedule.behavior_weight * beta});
  }
  return group;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) throw InvalidArgument("advantages need a group of at least two");
  const double g = static_cast<double>(rewards.size());
  const double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) / g;
  double ss = 0.0;
  for (double r : rewards) ss += (r - mean) * (r - mean);
  const double sd = std::sqrt(ss / (g - 1.0));
  std::vector<double> adv(rewards.size(), 0.0);
  if (sd < 1e-12) return adv;
  for (std::size_t i = 0; i < adv.size(); ++i) adv[i] = (rewards[i] - mean) / sd;
  return adv;
}

void TrainConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw InvalidArgument("learning_rate must be finite and nonnegative");
  }
  if (!(clip_ratio > 0.0 && clip_ratio < 1.0)) {
    throw InvalidArgument("clip_ratio must lie in (0, 1)");
  }
  if (!(kl_weight >= 0.0)) throw InvalidArgument("kl_weight must be nonnegative");
  if (iterations < 0) throw InvalidArgument("iterations must be nonnegative");
  if (updates_per_group < 1) throw InvalidArgument("updates_per_group must be at least 1");
}

LossAndGrad surrogate_loss_and_grad(const LatentParams& params, const LatentParams& old_params,
                                    const LatentParams& reference,
                                    std::span<const LatentSample> group,
                                    std::span<const double> advantages, const TrainConfig& config) {
  if (group.size() != advantages.size() || group.empty()) {
    throw InvalidArgument("group and advantages must be nonempty and of equal length");
  }
  const std::size_t k = params.arm_count;
  const std::size_t m = params.hidden_dim;
  const auto h = activation(params, params.start_token());
  const auto probs = softmax(logits(params, h));
  const auto old_probs = base_distribution(old_params);
  const double g = static_cast<double>(group.size());
  const double lo = 1.0 - config.clip_ratio;
  const double hi = 1.0 + config.clip_ratio;

  LossAndGrad out{0.0, zeros_like(params)};
  std::vector<double> grad_logits(k, 0.0);
  for (std::size_t s = 0; s < group.size(); ++s) {
    const std::size_t arm = group[s].arm;
    if (old_probs[arm] < 1e-300) {
      throw NumericalError("old probability of sampled arm " + std::to_string(arm + 1) +
                           " underflowed");
    }
    const double ratio = probs[arm] / old_probs[arm];
    const double adv = advantages[s];
    const double clipped = std::clamp(ratio, lo, hi);
    out.loss -= std::min(ratio * adv, clipped * adv) / g;
    const bool active = adv >= 0.0 ? ratio < hi : ratio > lo;
    if (!active) continue;
    // d ratio / d z_j = ratio (1[j == arm] - p_j)
    for (std::size_t j = 0; j < k; ++j) {
      grad_logits[j] -= adv / g * ratio * ((j == arm ? 1.0 : 0.0) - probs[j]);
    }
  }
  if (config.kl_weight > 0.0) {
    const auto ref = base_distribution(reference);
    double kl = 0.0;
    for (std::size_t j = 0; j < k; ++j) kl += probs[j] * std::log(probs[j] / ref[j]);
    out.loss += config.kl_weight * kl;
    for (std::size_t j = 0; j < k; ++j) {
      grad_logits[j] += config.kl_weight * probs[j] * (std::log(probs[j] / ref[j]) - kl);
    }
  }
  std::vector<double> grad_hidden(m, 0.0);
  for (std::size_t a = 0; a < k; ++a) {
    for (std::size_t j = 0; j < m; ++j) {
      out.grad.unembed_at(a, j) = grad_logits[a] * h[j];
      grad_hidden[j] += params.unembed_at(a, j) * grad_logits[a];
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    out.grad.encode_at(j, params.start_token()) = grad_hidden[j] * (1.0 - h[j] * h[j]);
  }
  return out;
}

namespace {

TrainRecord record(int iteration, const LatentParams& params, const RewardTable& rewards) {
  TrainRecord r;
  r.iteration = iteration;
  r.probs = base_distribution(params);
  for (std::size_t a = 0; a < r.probs.size(); ++a) {
    r.mean_x += r.probs[a] * rewards.primary()[a];
    r.mean_y += r.probs[a] * rewards.behavior()[a];
    if (r.probs[a] > 0.0) r.entropy -= r.probs[a] * std::log(r.probs[a]);
  }
  return r;
}

}  // namespace

TrainResult train(const LatentPolicy& policy, const RewardTable& rewards, const SteeringVector& v,
                  const IntensitySchedule& schedule, const TrainConfig& config) {
  config.validate();
  if (schedule.group_size() < 2) throw InvalidArgument("intensity schedule needs G >= 2");
  TrainResult result{{}, policy, 0.0};
  LatentParams& params = result.final_policy.params;
  RandomStream stream(config.seed);
  std::vector<double> betas;
  std::vector<double> behavior_means;
  result.trajectory.push_back(record(0, params, rewards));
  for (int it = 1; it <= config.iterations; ++it) {
    const auto group = rollout_group(params, v, schedule, rewards, stream);
    std::vector<double> rewards_g;
    for (const LatentSample& s : group) {
      rewards_g.push_back(s.reward);
      betas.push_back(s.beta);
      behavior_means.push_back(
          std::inner_product(rewards.behavior().begin(), rewards.behavior().end(),
                             steered_distribution(params, v, s.beta).begin(), 0.0));
    }
    const auto adv = group_advantages(rewards_g);
    const LatentParams old_params = params;
    for (int u = 0; u < config.updates_per_group; ++u) {
      const LossAndGrad lg = surrogate_loss_and_grad(params, old_params,
                                                     result.final_policy.reference, group, adv,
                                                     config);
      if (!std::isfinite(lg.loss)) {
        throw NumericalError("non-finite surrogate loss at iteration " + std::to_string(it));
      }
      for (std::size_t p = 0; p < params.parameter_count(); ++p) {
        params.parameter(p) -= config.learning_rate * lg.grad.parameter(p);
      }
      if (!params.finite()) {
        throw NumericalError("non-finite parameters at iteration " + std::to_string(it));
      }
    }
    result.trajectory.push_back(record(it, params, rewards));
  }
  result.behavior_proxy_correlation = pearson(betas, behavior_means);
  return result;
}

namespace {

std::vector<double> ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t t = i; t <= j; ++t) r[order[t]] = avg;
    i = j + 1;
  }
  return r;
}

}  // namespace

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw InvalidArgument("correlation needs two equal-length series of length >= 2");
  }
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = ranks(a);
  const auto rb = ranks(b);
  return pearson(ra, rb);
}

}  // namespace steerbandit::latent
