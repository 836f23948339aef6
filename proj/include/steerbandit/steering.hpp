#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "steerbandit/bandit.hpp"
#include "steerbandit/policy.hpp"
#include "steerbandit/steering_pair.hpp"

namespace steerbandit {

// A steering pair is parameterized by a per-arm contrast c with |c(i)| <= 1
// and sum_i pi(i) c(i) = 0; then pi±(i) = pi(i) (1 ± c(i)) are valid
// distributions averaging to pi, and the relative contrast rho equals c.

/// c(i) = s (y(i) - mu_y) / max_j |y(j) - mu_y|; zero when y is constant
/// (to within 1e-12 of its scale).
struct YTilt {
  double strength = 1.0;
};

/// As YTilt with the scalarized reward r in place of y.
struct RTilt {
  double strength = 1.0;
};

/// +s_hi on the max-y arms, -s_lo elsewhere, with pi_hi s_hi = pi_lo s_lo
/// and max(s_hi, s_lo) = 1.
struct TwoSidedSplit {};

struct CustomContrast {
  std::vector<double> c;
};

using ContrastSpec = std::variant<YTilt, RTilt, TwoSidedSplit, CustomContrast>;

std::string contrast_name(const ContrastSpec& spec);

/// The contrast vector c for this policy. Throws InvalidArgument for a
/// custom contrast outside [-1, 1] or with |sum pi c| > 1e-12, and for
/// tilt strengths outside [0, 1].
std::vector<double> contrast_vector(const Policy& policy, const ContrastSpec& spec,
                                    const BanditInstance& instance);

SteeringPair make_pair(const Policy& policy, const ContrastSpec& spec,
                       const BanditInstance& instance);

struct SteeringDiagnostics {
  std::size_t target_arm = 0;
  std::vector<double> d;
  std::vector<double> rho;
  double delta_x = 0.0;
  double delta_y = 0.0;
  double delta = 0.0;
  /// min over i != i* of (delta / 2G) (rho(i*) - rho(i)).
  double gamma_t = 0.0;
  /// (delta / 2G) (rho(i*) - rho(i)) per arm; the target's entry is 0.
  std::vector<double> cond1_margin;
  /// delta_y (rho(i*) - rho(i)) >= 2 (y(i*) - y(i)) - 1e-12 per arm; the
  /// target's entry is true.
  std::vector<bool> cond2_satisfied;
  /// lambda * gap_max / G.
  double gamma_cap = 0.0;

  bool cond2_all() const;
};

SteeringDiagnostics diagnostics(const Policy& policy, const SteeringPair& pair,
                                const BanditInstance& instance, int group_size);

/// gamma_t <= lambda gap_max / G + 1e-12.
bool gamma_cap_check(const SteeringDiagnostics& diag, const ScalarizedSummary& summary,
                     int group_size);

struct BoundInputs {
  /// sum_{i != i*} (pi_0(i) / pi_0(i*)) gap_i.
  double c0 = 0.0;
  double eta = 1.0;
  int group_size = 2;
  double eps = 0.01;
  double gamma = 0.0;
  ScalarizedSummary summary;
};

/// Validates eta > 0, G >= 2, eps > 0 and a strictly positive initial policy.
BoundInputs make_bound_inputs(const Policy& initial, const BanditInstance& instance, double eta,
                              int group_size, double eps, double gamma = 0.0);

struct IterationBound {
  double iterations = 0.0;
  /// Non-empty when the value is a boundary case (eps >= C0, or a gamma so
  /// negative that no rate is guaranteed).
  std::string note;
};

/// gap_max / (2 eta (1 - 1/G) gap_min) * log(C0 / eps).
IterationBound bound_grpo(const BoundInputs& in);

/// lambda gap_max / (2 eta sqrt(1 - 1/G) ((1 - 1/G) gap_min + gamma)) * log(C0 / eps).
IterationBound bound_vspo(const BoundInputs& in);

struct CorollaryVerdict {
  /// min(lambda, lambda^2 / 4) * gap_min.
  double threshold = 0.0;
  bool vspo_faster_guaranteed = false;
};

CorollaryVerdict corollary_compare(const ScalarizedSummary& summary, double gamma);

}  // namespace steerbandit
