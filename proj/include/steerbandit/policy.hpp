#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace steerbandit {

/// Smallest probability a soft update may produce; entries that underflow
/// are raised to this value and the update is flagged.
inline constexpr double kSupportFloor = 1e-300;

struct ScoreVector;
struct SoftUpdateResult;

/// A probability distribution over K arms.
class Policy {
 public:
  /// Any point of the simplex (zeros allowed). Throws InvalidArgument unless
  /// entries are finite, nonnegative and sum to 1 within 1e-12.
  static Policy create(std::vector<double> probs);

  /// A valid starting policy: additionally requires every entry > 0.
  static Policy initial(std::vector<double> probs);

  static Policy uniform(std::size_t arm_count);
  static Policy point_mass(std::size_t arm_count, std::size_t arm);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  bool strictly_positive() const noexcept;

 private:
  explicit Policy(std::vector<double> probs) : probs_(std::move(probs)) {}
  friend SoftUpdateResult soft_update(const Policy&, const ScoreVector&);

  std::vector<double> probs_;
};

/// An arm-level score A together with the update semantics it is meant for:
/// step size eta and group size G. Keeping the three together prevents a
/// score from being applied with the wrong (eta, G).
struct ScoreVector {
  std::vector<double> scores;
  double step_size = 1.0;
  int group_size = 2;

  /// Throws InvalidArgument on non-finite scores, eta <= 0 or G < 2.
  static ScoreVector create(std::vector<double> scores, double step_size, int group_size);
};

struct SoftUpdateResult {
  Policy policy;
  /// True when some entry underflowed and was raised to kSupportFloor.
  bool support_floored = false;
};

/// Closed-form maximizer of the KL-regularized objective:
///   pi'(i) ∝ pi(i) exp(eta A(i) / (G pi(i))).
/// Computed in log space with max-subtraction.
SoftUpdateResult soft_update(const Policy& policy, const ScoreVector& score);

/// (1/G) sum_i (c(i)/b(i)) A(i) - (1/eta) KL(c || b), with 0 log 0 = 0.
double update_objective(const Policy& candidate, const Policy& base, const ScoreVector& score);

/// KL(p || q) in nats; 0 log 0 = 0, +inf if p puts mass where q has none.
double kl_divergence(std::span<const double> p, std::span<const double> q);

/// log q_{i,t} = log(pi_t(i) / pi_t(target)) for every step and arm (the
/// target's own entry is 0).
std::vector<std::vector<double>> ratio_trajectory(std::span<const Policy> policies,
                                                  std::size_t target);

}  // namespace steerbandit
