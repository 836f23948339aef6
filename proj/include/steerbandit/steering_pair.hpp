#pragma once

#include <span>
#include <vector>

#include "steerbandit/policy.hpp"

namespace steerbandit {

/// Positively and negatively steered distributions (pi+, pi-) whose average
/// is the current policy.
class SteeringPair {
 public:
  /// Validates that each side lies on the simplex (zeros allowed).
  static SteeringPair create(std::vector<double> plus, std::vector<double> minus);

  std::span<const double> plus() const noexcept { return plus_.probs(); }
  std::span<const double> minus() const noexcept { return minus_.probs(); }
  const Policy& plus_policy() const noexcept { return plus_; }
  const Policy& minus_policy() const noexcept { return minus_; }
  std::size_t size() const noexcept { return plus_.size(); }

  /// (pi+ + pi-) / 2.
  std::vector<double> mixture() const;

  /// Largest entrywise |(pi+ + pi-)/2 - pi|.
  double mixture_error(const Policy& policy) const;

 private:
  SteeringPair(Policy plus, Policy minus) : plus_(std::move(plus)), minus_(std::move(minus)) {}

  Policy plus_;
  Policy minus_;
};

}  // namespace steerbandit
