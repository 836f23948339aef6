#include "steerbandit/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "steerbandit/errors.hpp"

namespace steerbandit {

namespace {

void check_simplex(std::span<const double> probs) {
  if (probs.empty()) throw InvalidArgument("policy must have at least one arm");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
      throw InvalidArgument("policy entry " + std::to_string(i + 1) +
                            " is negative or non-finite");
    }
    total += probs[i];
  }
  if (std::abs(total - 1.0) > 1e-12) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", total);
    throw InvalidArgument(std::string("policy entries sum to ") + buf + ", not 1");
  }
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) {
    throw DimensionMismatch("dimension mismatch: " + std::to_string(a) + " vs " +
                            std::to_string(b));
  }
}

}  // namespace

Policy Policy::create(std::vector<double> probs) {
  check_simplex(probs);
  return Policy(std::move(probs));
}

Policy Policy::initial(std::vector<double> probs) {
  check_simplex(probs);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0)) {
      throw InvalidArgument("initial policy must have full support; arm " +
                            std::to_string(i + 1) + " has zero mass");
    }
  }
  return Policy(std::move(probs));
}

Policy Policy::uniform(std::size_t arm_count) {
  if (arm_count == 0) throw InvalidArgument("policy must have at least one arm");
  return Policy(std::vector<double>(arm_count, 1.0 / static_cast<double>(arm_count)));
}

Policy Policy::point_mass(std::size_t arm_count, std::size_t arm) {
  if (arm >= arm_count) throw InvalidArgument("point-mass arm out of range");
  std::vector<double> p(arm_count, 0.0);
  p[arm] = 1.0;
  return Policy(std::move(p));
}

bool Policy::strictly_positive() const noexcept {
  return std::all_of(probs_.begin(), probs_.end(), [](double p) { return p > 0.0; });
}

ScoreVector ScoreVector::create(std::vector<double> scores, double step_size, int group_size) {
  for (double a : scores) {
    if (!std::isfinite(a)) throw InvalidArgument("score vector has a non-finite entry");
  }
  if (!(step_size > 0.0) || !std::isfinite(step_size)) {
    throw InvalidArgument("step size must be positive");
  }
  if (group_size < 2) throw InvalidArgument("group size must be at least 2");
  return ScoreVector{std::move(scores), step_size, group_size};
}

SoftUpdateResult soft_update(const Policy& policy, const ScoreVector& score) {
  check_same_size(policy.size(), score.scores.size());
  if (!policy.strictly_positive()) {
    throw InvalidArgument("soft update requires a strictly positive policy");
  }
  const std::size_t k = policy.size();
  const double scale = score.step_size / static_cast<double>(score.group_size);
  if (std::all_of(score.scores.begin(), score.scores.end(), [](double a) { return a == 0.0; })) {
    return SoftUpdateResult{policy, false};
  }
  std::vector<double> logw(k);
  for (std::size_t i = 0; i < k; ++i) {
    logw[i] = std::log(policy[i]) + scale * score.scores[i] / policy[i];
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(top)) throw NumericalError("soft update exponent is not finite");
  double total = 0.0;
  for (double& w : logw) {
    w = std::exp(w - top);
    total += w;
  }
  bool floored = false;
  for (double& p : logw) {
    p /= total;
    if (p < kSupportFloor) {
      p = kSupportFloor;
      floored = true;
    }
  }
  return SoftUpdateResult{Policy(std::move(logw)), floored};
}

double kl_divergence(std::span<const double> p, std::span<const double> q) {
  check_same_size(p.size(), q.size());
  double kl = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == 0.0) continue;
    if (q[i] == 0.0) return std::numeric_limits<double>::infinity();
    kl += p[i] * std::log(p[i] / q[i]);
  }
  return kl;
}

double update_objective(const Policy& candidate, const Policy& base, const ScoreVector& score) {
  check_same_size(candidate.size(), base.size());
  check_same_size(candidate.size(), score.scores.size());
  if (!base.strictly_positive()) {
    throw InvalidArgument("update objective requires a strictly positive base policy");
  }
  double linear = 0.0;
  for (std::size_t i = 0; i < candidate.size(); ++i) {
    linear += candidate[i] / base[i] * score.scores[i];
  }
  return linear / score.group_size -
         kl_divergence(candidate.probs(), base.probs()) / score.step_size;
}

std::vector<std::vector<double>> ratio_trajectory(std::span<const Policy> policies,
                                                  std::size_t target) {
  std::vector<std::vector<double>> out;
  out.reserve(policies.size());
  for (const Policy& p : policies) {
    if (target >= p.size()) throw InvalidArgument("target arm out of range");
    std::vector<double> row(p.size());
    const double log_star = std::log(p[target]);
    for (std::size_t i = 0; i < p.size(); ++i) {
      row[i] = i == target ? 0.0 : std::log(p[i]) - log_star;
    }
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace steerbandit
