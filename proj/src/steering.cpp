#include "steerbandit/steering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steerbandit/errors.hpp"

namespace steerbandit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_strength(double s) {
  if (!(s >= 0.0 && s <= 1.0)) throw InvalidArgument("tilt strength must lie in [0, 1]");
}

std::vector<double> tilt(const Policy& policy, std::span<const double> values, double strength) {
  check_strength(strength);
  const double mean = weighted_mean(policy.probs(), values);
  std::vector<double> dev(values.size());
  for (std::size_t i = 0; i < dev.size(); ++i) dev[i] = values[i] - mean;
  // Second pass removes the rounding left in the mean when values are large.
  const double residual = weighted_mean(policy.probs(), dev);
  double spread = 0.0;
  for (double& d : dev) {
    d -= residual;
    spread = std::max(spread, std::abs(d));
  }
  double scale = 1.0;
  for (double v : values) scale = std::max(scale, std::abs(v));
  std::vector<double> c(values.size(), 0.0);
  // Constant values up to rounding: no contrast.
  if (spread <= kExactTolerance * scale) return c;
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = std::clamp(strength * dev[i] / spread, -1.0, 1.0);
  }
  return c;
}

std::vector<double> split(const Policy& policy, const BanditInstance& instance) {
  const auto y = instance.behavior();
  const double y_max = *std::max_element(y.begin(), y.end());
  double mass_hi = 0.0;
  double mass_lo = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] == y_max ? mass_hi : mass_lo) += policy[i];
  std::vector<double> c(y.size(), 0.0);
  if (mass_hi <= 0.0 || mass_lo <= 0.0) return c;
  double s_hi = 1.0;
  double s_lo = 1.0;
  if (mass_hi <= mass_lo) {
    s_lo = mass_hi / mass_lo;
  } else {
    s_hi = mass_lo / mass_hi;
  }
  for (std::size_t i = 0; i < y.size(); ++i) c[i] = y[i] == y_max ? s_hi : -s_lo;
  return c;
}

std::vector<double> validated_custom(const Policy& policy, const std::vector<double>& c) {
  if (c.size() != policy.size()) throw DimensionMismatch("custom contrast has the wrong length");
  double weighted = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!std::isfinite(c[i]) || c[i] < -1.0 || c[i] > 1.0) {
      throw InvalidArgument("custom contrast entry " + std::to_string(i + 1) +
                            " lies outside [-1, 1]");
    }
    weighted += policy[i] * c[i];
  }
  if (std::abs(weighted) > 1e-12) {
    throw InvalidArgument("custom contrast has nonzero policy-weighted mean " +
                          std::to_string(weighted));
  }
  return c;
}

}  // namespace

std::string contrast_name(const ContrastSpec& spec) {
  return std::visit(overloaded{[](const YTilt&) { return std::string("y_tilt"); },
                               [](const RTilt&) { return std::string("r_tilt"); },
                               [](const TwoSidedSplit&) { return std::string("two_sided_split"); },
                               [](const CustomContrast&) { return std::string("custom"); }},
                    spec);
}

std::vector<double> contrast_vector(const Policy& policy, const ContrastSpec& spec,
                                    const BanditInstance& instance) {
  if (policy.size() != instance.arm_count()) {
    throw DimensionMismatch("policy and instance differ in arm count");
  }
  return std::visit(
      overloaded{
          [&](const YTilt& t) { return tilt(policy, instance.behavior(), t.strength); },
          [&](const RTilt& t) { return tilt(policy, instance.scalar_rewards(), t.strength); },
          [&](const TwoSidedSplit&) { return split(policy, instance); },
          [&](const CustomContrast& cc) { return validated_custom(policy, cc.c); }},
      spec);
}

SteeringPair make_pair(const Policy& policy, const ContrastSpec& spec,
                       const BanditInstance& instance) {
  const auto c = contrast_vector(policy, spec, instance);
  std::vector<double> plus(c.size());
  std::vector<double> minus(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    plus[i] = policy[i] * (1.0 + c[i]);
    minus[i] = policy[i] * (1.0 - c[i]);
  }
  return SteeringPair::create(std::move(plus), std::move(minus));
}

bool SteeringDiagnostics::cond2_all() const {
  return std::all_of(cond2_satisfied.begin(), cond2_satisfied.end(), [](bool b) { return b; });
}

SteeringDiagnostics diagnostics(const Policy& policy, const SteeringPair& pair,
                                const BanditInstance& instance, int group_size) {
  if (group_size < 2) throw InvalidArgument("group size must be at least 2");
  if (pair.size() != policy.size() || policy.size() != instance.arm_count()) {
    throw DimensionMismatch("policy, pair and instance differ in arm count");
  }
  const ScalarizedSummary summary = summarize(instance);
  const auto x = instance.primary();
  const auto y = instance.behavior();
  const std::size_t k = policy.size();
  const std::size_t star = instance.target();

  SteeringDiagnostics diag;
  diag.target_arm = star;
  diag.d.resize(k);
  diag.rho.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    diag.d[i] = 0.5 * (pair.plus()[i] - pair.minus()[i]);
    diag.rho[i] = policy[i] > 0.0 ? diag.d[i] / policy[i] : 0.0;
  }
  diag.delta_x = weighted_mean(pair.plus(), x) - weighted_mean(pair.minus(), x);
  diag.delta_y = weighted_mean(pair.plus(), y) - weighted_mean(pair.minus(), y);
  diag.delta = diag.delta_x + instance.alpha() * diag.delta_y;

  diag.cond1_margin.assign(k, 0.0);
  diag.cond2_satisfied.assign(k, true);
  diag.gamma_t = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    if (i == star) continue;
    const double contrast_gap = diag.rho[star] - diag.rho[i];
    diag.cond1_margin[i] = diag.delta / (2.0 * group_size) * contrast_gap;
    diag.gamma_t = std::min(diag.gamma_t, diag.cond1_margin[i]);
    diag.cond2_satisfied[i] =
        diag.delta_y * contrast_gap >= 2.0 * (y[star] - y[i]) - kExactTolerance;
  }
  diag.gamma_cap = summary.conditioning * summary.gap_max / group_size;
  return diag;
}

bool gamma_cap_check(const SteeringDiagnostics& diag, const ScalarizedSummary& summary,
                     int group_size) {
  return diag.gamma_t <= summary.conditioning * summary.gap_max / group_size + kExactTolerance;
}

BoundInputs make_bound_inputs(const Policy& initial, const BanditInstance& instance, double eta,
                              int group_size, double eps, double gamma) {
  if (!(eta > 0.0)) throw InvalidArgument("eta must be positive");
  if (group_size < 2) throw InvalidArgument("group size must be at least 2");
  if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
  if (!initial.strictly_positive()) {
    throw InvalidArgument("initial policy must have full support");
  }
  if (initial.size() != instance.arm_count()) {
    throw DimensionMismatch("initial policy and instance differ in arm count");
  }
  BoundInputs in;
  in.summary = summarize(instance);
  in.eta = eta;
  in.group_size = group_size;
  in.eps = eps;
  in.gamma = gamma;
  const std::size_t star = in.summary.target_arm;
  for (std::size_t i = 0; i < initial.size(); ++i) {
    if (i != star) in.c0 += initial[i] / initial[star] * in.summary.gaps[i];
  }
  return in;
}

namespace {

// log(C0 / eps), or nullopt-equivalent 0 with a note when eps >= C0.
double log_ratio(const BoundInputs& in, std::string& note) {
  if (in.eps >= in.c0) {
    note = "eps >= C0: the initial policy already meets the target";
    return 0.0;
  }
  return std::log(in.c0 / in.eps);
}

}  // namespace

IterationBound bound_grpo(const BoundInputs& in) {
  IterationBound b;
  const double log_term = log_ratio(in, b.note);
  if (log_term == 0.0) return b;
  const double keep = 1.0 - 1.0 / in.group_size;
  b.iterations = in.summary.gap_max / (2.0 * in.eta * keep * in.summary.gap_min) * log_term;
  return b;
}

IterationBound bound_vspo(const BoundInputs& in) {
  IterationBound b;
  const double log_term = log_ratio(in, b.note);
  if (log_term == 0.0) return b;
  const double keep = 1.0 - 1.0 / in.group_size;
  const double rate = keep * in.summary.gap_min + in.gamma;
  if (!(rate > 0.0)) {
    b.iterations = std::numeric_limits<double>::infinity();
    b.note = "(1 - 1/G) gap_min + gamma <= 0: no rate guaranteed";
    return b;
  }
  b.iterations = in.summary.conditioning * in.summary.gap_max /
                 (2.0 * in.eta * std::sqrt(keep) * rate) * log_term;
  return b;
}

CorollaryVerdict corollary_compare(const ScalarizedSummary& summary, double gamma) {
  const double lambda = summary.conditioning;
  CorollaryVerdict v;
  v.threshold = std::min(lambda, lambda * lambda / 4.0) * summary.gap_min;
  v.vspo_faster_guaranteed = gamma > v.threshold;
  return v;
}

}  // namespace steerbandit
