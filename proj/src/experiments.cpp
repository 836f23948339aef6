#include "steerbandit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "steerbandit/advantage.hpp"
#include "steerbandit/errors.hpp"
#include "steerbandit/random.hpp"

namespace steerbandit {

using nlohmann::json;

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

double median(std::vector<double> values) { return quantile(std::move(values), 0.5); }

// --- population dynamics ----------------------------------------------------

namespace {

std::vector<double> population_score(Method method, const Policy& pi, const RunConfig& config,
                                     const BanditInstance& instance) {
  if (method == Method::grpo) return population_score_grpo(pi, instance, config.group_size);
  const SteeringPair pair = make_pair(pi, config.contrast, instance);
  return population_score_vspo(pi, pair, instance, config.group_size);
}

// Relative error of log q_{i,t+1} - log q_{i,t} against the predicted
// decrement, worst over suboptimal arms. Errors are absolute below `floor`.
double recursion_error(const Policy& before, const Policy& after, std::span<const double> predicted,
                       std::size_t star, double floor = 1e-300) {
  double worst = 0.0;
  for (std::size_t i = 0; i < before.size(); ++i) {
    if (i == star) continue;
    const double actual = (std::log(after[i]) - std::log(after[star])) -
                          (std::log(before[i]) - std::log(before[star]));
    const double scale = std::max(std::abs(predicted[i]), floor);
    worst = std::max(worst, std::abs(actual - predicted[i]) / scale);
  }
  return worst;
}

}  // namespace

PopulationRun run_population(const RunConfig& config, const Scenario& scenario, Method method) {
  const BanditInstance& instance = scenario.instance;
  const ScalarizedSummary summary = summarize(instance);
  const std::size_t star = summary.target_arm;
  const int g = config.group_size;
  if (method == Method::vspo && g % 2 != 0) throw InvalidArgument("VSPO needs an even group size");

  PopulationRun run;
  run.method = method;
  run.optimal_reward = summary.optimal_reward();
  const double goal = run.optimal_reward - config.eps_target;

  Policy pi = scenario.initial_policy;
  double min_gamma = std::numeric_limits<double>::infinity();
  for (int t = 0;; ++t) {
    TrajectoryRecord rec;
    rec.t = t;
    rec.J = expected_reward(pi, instance);
    rec.probs.assign(pi.probs().begin(), pi.probs().end());
    std::optional<SteeringDiagnostics> diag;
    if (method == Method::vspo) {
      const SteeringPair pair = make_pair(pi, config.contrast, instance);
      diag = diagnostics(pi, pair, instance, g);
      rec.gamma_t = diag->gamma_t;
      rec.delta_t = diag->delta;
      rec.cond2_ok = diag->cond2_all();
    }
    run.records.push_back(rec);
    if (!run.hitting_time && rec.J >= goal) run.hitting_time = t;
    if (diag && (!run.hitting_time || t == 0)) {
      if (!run.hitting_time) {
        min_gamma = std::min(min_gamma, diag->gamma_t);
        run.certificate_held = run.certificate_held && diag->cond2_all();
      } else {
        min_gamma = diag->gamma_t;
      }
    }
    if (t >= config.max_iterations) break;
    if (config.eta == 0.0) continue;

    std::vector<double> scores;
    try {
      scores = population_score(method, pi, config, instance);
    } catch (const DegenerateVariance&) {
      run.degenerate_stop = true;
      break;
    }
    const ScoreVector score = ScoreVector::create(scores, config.eta, g);
    SoftUpdateResult next = soft_update(pi, score);
    if (next.support_floored) {
      ++run.floored_steps;
    } else {
      std::vector<double> predicted(pi.size(), 0.0);
      const double scale = config.eta / g;
      if (method == Method::grpo) {
        const double sigma = grpo_moments(pi, instance).sigma_r;
        for (std::size_t i = 0; i < pi.size(); ++i) {
          predicted[i] = -config.eta * (1.0 - 1.0 / g) * summary.gaps[i] / sigma;
        }
      } else {
        for (std::size_t i = 0; i < pi.size(); ++i) {
          predicted[i] = scale * (scores[i] / pi[i] - scores[star] / pi[star]);
        }
      }
      run.max_recursion_error =
          std::max(run.max_recursion_error, recursion_error(pi, next.policy, predicted, star));
      ++run.recursion_steps;
    }
    pi = std::move(next.policy);
  }

  const double eta_for_bound = config.eta > 0.0 ? config.eta : 1.0;
  if (method == Method::vspo) {
    run.min_gamma = min_gamma;
    run.bound = bound_vspo(
        make_bound_inputs(scenario.initial_policy, instance, eta_for_bound, g, config.eps_target,
                          min_gamma));
  } else {
    run.bound = bound_grpo(
        make_bound_inputs(scenario.initial_policy, instance, eta_for_bound, g, config.eps_target));
  }
  run.within_bound =
      run.hitting_time.has_value() && *run.hitting_time <= std::ceil(run.bound.iterations);
  return run;
}

// --- empirical dynamics -----------------------------------------------------

EmpiricalRun run_empirical(const RunConfig& config, const Scenario& scenario, Method method) {
  const BanditInstance& instance = scenario.instance;
  const std::size_t star = instance.target();
  const int g = config.group_size;
  if (method == Method::vspo && g % 2 != 0) throw InvalidArgument("VSPO needs an even group size");

  EmpiricalRun run;
  run.method = method;
  for (int rep = 0; rep < config.replications; ++rep) {
    ReplicationTrace trace;
    trace.replication = rep;
    trace.seed = mix_seed(config.seed, static_cast<std::uint64_t>(rep));
    Policy pi = scenario.initial_policy;
    for (int t = 0; t <= config.max_iterations; ++t) {
      TrajectoryRecord rec;
      rec.t = t;
      rec.J = expected_reward(pi, instance);
      rec.probs.assign(pi.probs().begin(), pi.probs().end());
      if (t == config.max_iterations) {
        trace.records.push_back(std::move(rec));
        break;
      }
      const std::uint64_t group_seed = mix_seed(trace.seed, static_cast<std::uint64_t>(t));
      rec.group_seed = group_seed;
      RandomStream stream(group_seed);
      std::vector<double> scores;
      if (method == Method::grpo) {
        scores = empirical_score_grpo(sample_group_grpo(pi, instance, g, stream));
      } else {
        const SteeringPair pair = make_pair(pi, config.contrast, instance);
        const SteeringDiagnostics diag = diagnostics(pi, pair, instance, g);
        rec.gamma_t = diag.gamma_t;
        rec.delta_t = diag.delta;
        rec.cond2_ok = diag.cond2_all();
        scores = empirical_score_vspo(sample_group_vspo(pair, instance, g, stream));
      }
      trace.records.push_back(std::move(rec));
      if (config.eta > 0.0) {
        pi = soft_update(pi, ScoreVector::create(std::move(scores), config.eta, g)).policy;
      }
    }
    run.final_target_mass.push_back(trace.records.back().probs[star]);
    run.replications.push_back(std::move(trace));
  }
  for (int t = 0; t <= config.max_iterations; ++t) {
    std::vector<double> js;
    for (const auto& trace : run.replications) js.push_back(trace.records[t].J);
    run.summary.push_back({t, quantile(js, 0.25), quantile(js, 0.5), quantile(js, 0.75)});
  }
  run.median_final_target_mass = median(run.final_target_mass);
  return run;
}

// --- lemma verification -----------------------------------------------------

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const VerifyCheck& c) { return c.pass; });
}

int VerifyReport::failures() const {
  return static_cast<int>(
      std::count_if(checks.begin(), checks.end(), [](const VerifyCheck& c) { return !c.pass; }));
}

namespace {

VerifyCheck monte_carlo_check(std::string name, const MonteCarloEstimate& est, double target) {
  VerifyCheck c;
  c.name = std::move(name);
  c.estimate = est.mean;
  c.target = target;
  c.std_error = est.std_error;
  const double diff = est.mean - target;
  if (est.std_error > 0.0) {
    c.z = diff / est.std_error;
  } else {
    // A deterministic statistic must hit its target to rounding.
    c.z = std::abs(diff) <= kExactTolerance ? 0.0 : std::copysign(1e300, diff);
  }
  c.pass = std::abs(c.z) <= 3.0;
  c.hard_fail = std::abs(c.z) > 5.0;
  return c;
}

VerifyCheck exact_check(std::string name, double error, double tolerance) {
  VerifyCheck c;
  c.name = std::move(name);
  c.exact = true;
  c.estimate = error;
  c.target = 0.0;
  c.std_error = tolerance / 3.0;
  c.z = error / c.std_error;
  c.pass = std::abs(c.z) <= 3.0;
  c.hard_fail = !c.pass;
  return c;
}

std::string arm_label(std::size_t i) { return "arm" + std::to_string(i + 1); }

struct RandomDraw {
  BanditInstance instance;
  Policy policy;
  ContrastSpec contrast;
  int group_size;
};

RandomDraw random_draw(RandomStream& rng) {
  for (;;) {
    const std::size_t k = 2 + rng.next_u64() % 5;
    std::vector<double> x(k), y(k);
    const bool coarse_y = rng.uniform() < 0.5;
    for (std::size_t i = 0; i < k; ++i) {
      x[i] = rng.uniform(-1.0, 2.0);
      y[i] = coarse_y ? 0.5 * static_cast<double>(rng.next_u64() % 3) : rng.uniform(0.0, 1.5);
    }
    RewardTable rewards = RewardTable::create(x, y);
    // Near-tied behaviors push the threshold to huge scales; keep rewards O(1).
    const double threshold = alpha_threshold(rewards);
    if (threshold > 5.0) continue;
    const double alpha = threshold + rng.uniform(0.05, 2.0);
    std::optional<BanditInstance> instance;
    try {
      instance = BanditInstance::create(std::move(rewards), alpha);
    } catch (const DegenerateInstance&) {
      continue;
    }
    std::vector<double> p(k);
    double total = 0.0;
    for (double& v : p) {
      v = 0.02 + rng.uniform();
      total += v;
    }
    for (double& v : p) v /= total;
    double renorm = 0.0;
    for (std::size_t i = 0; i + 1 < k; ++i) renorm += p[i];
    p[k - 1] = 1.0 - renorm;
    if (!(p[k - 1] > 0.0)) continue;
    Policy policy = Policy::initial(p);

    ContrastSpec contrast;
    switch (rng.next_u64() % 4) {
      case 0: contrast = YTilt{rng.uniform()}; break;
      case 1: contrast = RTilt{rng.uniform()}; break;
      case 2: contrast = TwoSidedSplit{}; break;
      default: {
        std::vector<double> c(k);
        for (double& v : c) v = rng.uniform(-1.0, 1.0);
        const double mean = weighted_mean(policy.probs(), c);
        double spread = 0.0;
        for (double& v : c) {
          v -= mean;
          spread = std::max(spread, std::abs(v));
        }
        if (spread > 1.0) {
          for (double& v : c) v /= spread;
        }
        contrast = CustomContrast{c};
      }
    }
    const int g = 2 * static_cast<int>(1 + rng.next_u64() % 4);
    return RandomDraw{std::move(*instance), std::move(policy), std::move(contrast), g};
  }
}

}  // namespace

void append_monte_carlo_checks(VerifyReport& report, const Scenario& scenario,
                               const ContrastSpec& contrast, int group_size, std::size_t groups,
                               std::uint64_t seed) {
  const BanditInstance& instance = scenario.instance;
  const Policy& pi = scenario.initial_policy;
  const std::string prefix = scenario.label + "/G=" + std::to_string(group_size) + "/";

  RandomStream grpo_stream = RandomStream::derive(seed, 0);
  const LemmaEstimate grpo = estimate_grpo_lemma(pi, instance, group_size, groups, grpo_stream);
  const auto grpo_target = population_numerator_grpo(pi, instance, group_size);
  for (std::size_t i = 0; i < instance.arm_count(); ++i) {
    report.checks.push_back(
        monte_carlo_check(prefix + "grpo/numerator/" + arm_label(i), grpo.numerator[i], grpo_target[i]));
  }
  const double sigma = grpo_moments(pi, instance).sigma_r;
  report.checks.push_back(
      monte_carlo_check(prefix + "grpo/sample_variance", grpo.sample_variance, sigma * sigma));

  const SteeringPair pair = make_pair(pi, contrast, instance);
  RandomStream vspo_stream = RandomStream::derive(seed, 1);
  const LemmaEstimate vspo = estimate_vspo_lemma(pair, instance, group_size, groups, vspo_stream);
  const auto vspo_target = population_numerator_vspo(pi, pair, instance, group_size);
  for (std::size_t i = 0; i < instance.arm_count(); ++i) {
    report.checks.push_back(
        monte_carlo_check(prefix + "vspo/numerator/" + arm_label(i), vspo.numerator[i], vspo_target[i]));
  }
  report.checks.push_back(monte_carlo_check(
      prefix + "vspo/sample_variance", vspo.sample_variance,
      vspo_moments(pair, instance).expected_sample_variance(group_size)));
}

void append_identity_checks(VerifyReport& report, int draws, std::uint64_t seed) {
  constexpr double tol = 1e-10;
  RandomStream rng = RandomStream::derive(seed, 0x1D);
  double mixture = 0.0, within = 0.0, sum_grpo = 0.0, sum_vspo = 0.0, rho_range = 0.0;
  double cap = 0.0, popoviciu = 0.0, recursion = 0.0, corollary = 0.0, sum_empirical = 0.0;
  for (int n = 0; n < draws; ++n) {
    const RandomDraw draw = random_draw(rng);
    const BanditInstance& inst = draw.instance;
    const Policy& pi = draw.policy;
    const int g = draw.group_size;
    const ScalarizedSummary summary = summarize(inst);

    const SteeringPair pair = make_pair(pi, draw.contrast, inst);
    mixture = std::max(mixture, pair.mixture_error(pi));

    const VspoMoments m = vspo_moments(pair, inst);
    within = std::max(within, std::abs(0.5 * (m.var_plus + m.var_minus) -
                                       (m.pooled_var - 0.25 * m.delta * m.delta)));

    const auto a_grpo = population_score_grpo(pi, inst, g);
    sum_grpo = std::max(sum_grpo, std::abs(std::accumulate(a_grpo.begin(), a_grpo.end(), 0.0)));
    if (m.expected_sample_variance(g) > 0.0) {
      const auto a_vspo = population_score_vspo(pi, pair, inst, g);
      sum_vspo = std::max(sum_vspo, std::abs(std::accumulate(a_vspo.begin(), a_vspo.end(), 0.0)));
    }

    RandomStream group_rng = RandomStream::derive(seed, 0x2000000ULL + static_cast<std::uint64_t>(n));
    const auto emp = empirical_score_grpo(sample_group_grpo(pi, inst, g, group_rng));
    sum_empirical = std::max(sum_empirical, std::abs(std::accumulate(emp.begin(), emp.end(), 0.0)));
    const auto emp_v = empirical_score_vspo(sample_group_vspo(pair, inst, g, group_rng));
    sum_empirical = std::max(sum_empirical, std::abs(std::accumulate(emp_v.begin(), emp_v.end(), 0.0)));

    const SteeringDiagnostics diag = diagnostics(pi, pair, inst, g);
    for (double r : diag.rho) rho_range = std::max(rho_range, std::abs(r) - 1.0);
    cap = std::max(cap, diag.gamma_t - diag.gamma_cap);

    const auto r = inst.scalar_rewards();
    const auto [lo, hi] = std::minmax_element(r.begin(), r.end());
    const double sigma = grpo_moments(pi, inst).sigma_r;
    popoviciu = std::max(popoviciu, sigma * sigma - popoviciu_bound(*lo, *hi));

    const double eta = 0.5;
    const SoftUpdateResult next = soft_update(pi, ScoreVector::create(a_grpo, eta, g));
    if (!next.support_floored) {
      std::vector<double> predicted(pi.size());
      for (std::size_t i = 0; i < pi.size(); ++i) {
        predicted[i] = -eta * (1.0 - 1.0 / g) * summary.gaps[i] / sigma;
      }
      recursion =
          std::max(recursion, recursion_error(pi, next.policy, predicted, summary.target_arm, 1.0));
    }

    const double gamma = diag.gamma_t;
    const CorollaryVerdict verdict = corollary_compare(summary, gamma);
    if (verdict.vspo_faster_guaranteed) {
      BoundInputs in = make_bound_inputs(pi, inst, eta, g, 1.0, gamma);
      for (double frac : {0.1, 0.01, 0.001}) {
        in.eps = frac * in.c0;
        const double gap = bound_vspo(in).iterations - bound_grpo(in).iterations;
        corollary = std::max(corollary, gap >= 0.0 ? gap + tol : 0.0);
      }
    }
  }
  const std::string p = "identity/";
  report.checks.push_back(exact_check(p + "mixture_reconstruction", mixture, tol));
  report.checks.push_back(exact_check(p + "within_variance", within, tol));
  report.checks.push_back(exact_check(p + "population_grpo_score_sum_zero", sum_grpo, tol));
  report.checks.push_back(exact_check(p + "population_vspo_score_sum_zero", sum_vspo, tol));
  report.checks.push_back(exact_check(p + "empirical_score_sum_zero", sum_empirical, tol));
  report.checks.push_back(exact_check(p + "rho_in_unit_interval", std::max(rho_range, 0.0), tol));
  report.checks.push_back(exact_check(p + "gamma_cap", std::max(cap, 0.0), tol));
  report.checks.push_back(exact_check(p + "popoviciu", std::max(popoviciu, 0.0), tol));
  report.checks.push_back(exact_check(p + "grpo_ratio_recursion", recursion, tol));
  report.checks.push_back(exact_check(p + "corollary_ordering", corollary, tol));
}

VerifyReport verify_lemmas(const RunConfig& config) {
  VerifyReport report;
  if (config.groups < 10000) {
    report.low_power = true;
    report.warnings.push_back("low power: " + std::to_string(config.groups) +
                              " groups per configuration (at least 10000 recommended)");
  }
  std::uint64_t index = 0;
  for (const Scenario& scenario : config.scenarios) {
    for (int g : config.verify_group_sizes) {
      append_monte_carlo_checks(report, scenario, config.contrast, g, config.groups,
                                mix_seed(config.seed, index++));
    }
  }
  append_identity_checks(report, config.identity_draws, config.seed);
  return report;
}

// --- bounds -----------------------------------------------------------------

json compute_bounds(const RunConfig& config, const Scenario& scenario) {
  const BanditInstance& instance = scenario.instance;
  const Policy& pi = scenario.initial_policy;
  const int g = config.group_size;
  const SteeringPair pair = make_pair(pi, config.contrast, instance);
  const SteeringDiagnostics diag = diagnostics(pi, pair, instance, g);
  const BoundInputs in =
      make_bound_inputs(pi, instance, config.eta, g, config.eps_target, diag.gamma_t);
  const IterationBound grpo = bound_grpo(in);
  const IterationBound vspo = bound_vspo(in);
  const CorollaryVerdict verdict = corollary_compare(in.summary, diag.gamma_t);

  json cond2 = json::array();
  for (std::size_t i = 0; i < diag.cond2_satisfied.size(); ++i) {
    if (i != diag.target_arm) cond2.push_back(static_cast<bool>(diag.cond2_satisfied[i]));
  }
  json notes = json::array();
  if (!grpo.note.empty()) notes.push_back("T_grpo: " + grpo.note);
  if (!vspo.note.empty()) notes.push_back("T_vspo: " + vspo.note);

  json out;
  out["scenario"] = scenario.label;
  out["contrast"] = contrast_name(config.contrast);
  out["eta"] = config.eta;
  out["G"] = g;
  out["eps"] = config.eps_target;
  out["C0"] = in.c0;
  out["lambda"] = in.summary.conditioning;
  out["delta_min"] = in.summary.gap_min;
  out["delta_max"] = in.summary.gap_max;
  out["target_arm"] = in.summary.target_arm + 1;
  out["gamma_t"] = diag.gamma_t;
  out["gamma_cap"] = diag.gamma_cap;
  out["gamma_cap_ok"] = gamma_cap_check(diag, in.summary, g);
  out["cond2"] = cond2;
  out["gamma_good"] = diag.cond2_all();
  out["corollary_threshold"] = verdict.threshold;
  out["vspo_faster_guaranteed"] = verdict.vspo_faster_guaranteed;
  out["T_grpo"] = grpo.iterations;
  out["T_vspo"] = std::isfinite(vspo.iterations) ? json(vspo.iterations) : json(nullptr);
  out["notes"] = notes;
  return out;
}

// --- latent ----------------------------------------------------------------

LatentRun run_latent(const RunConfig& config) {
  const LatentSettings& s = config.latent;
  const RewardTable& rewards = config.scenario().instance.rewards();
  const auto y = rewards.behavior();
  const double y_max = *std::max_element(y.begin(), y.end());
  std::vector<std::size_t> positive, negative;
  for (std::size_t a = 0; a < y.size(); ++a) (y[a] == y_max ? positive : negative).push_back(a);
  if (negative.empty()) throw ConfigError("latent mode needs arms with differing behavior");

  std::vector<double> betas = s.schedule.intensities;
  std::sort(betas.begin(), betas.end());
  betas.erase(std::unique(betas.begin(), betas.end()), betas.end());

  LatentRun run;
  std::vector<double> dy, dx;
  for (int k = 0; k < s.seeds; ++k) {
    LatentSeedResult r;
    r.index = k;
    r.seed = mix_seed(config.seed, static_cast<std::uint64_t>(k));
    latent::InitOptions init;
    init.hidden_dim = s.hidden_dim;
    if (s.plant_strength > 0.0) {
      init.planted_behavior.assign(y.begin(), y.end());
      init.plant_strength = s.plant_strength;
    }
    RandomStream init_stream(r.seed);
    const latent::LatentPolicy policy = latent::random_policy(rewards.arm_count(), init, init_stream);
    const latent::SteeringVector v =
        latent::build_vector(policy.params, positive, negative, s.normalize_vector);

    std::vector<double> ey;
    for (double b : betas) {
      const auto p = latent::steered_distribution(policy.params, v, b);
      ey.push_back(std::inner_product(y.begin(), y.end(), p.begin(), 0.0));
    }
    r.steering_spearman = betas.size() >= 2 ? latent::spearman(betas, ey) : 0.0;
    r.mixture_deviation_b = latent::mixture_deviation(policy.params, v, 0.1);
    r.mixture_deviation_half_b = latent::mixture_deviation(policy.params, v, 0.05);

    latent::TrainConfig train = s.train;
    train.seed = mix_seed(r.seed, 1);
    r.train = latent::train(policy, rewards, v, s.schedule, train);
    r.initial_x = r.train.trajectory.front().mean_x;
    r.initial_y = r.train.trajectory.front().mean_y;
    r.final_x = r.train.trajectory.back().mean_x;
    r.final_y = r.train.trajectory.back().mean_y;
    r.behavior_proxy_correlation = r.train.behavior_proxy_correlation;
    dy.push_back(r.final_y - r.initial_y);
    dx.push_back(r.final_x - r.initial_x);
    run.seeds.push_back(std::move(r));
  }
  run.median_delta_y = median(dy);
  run.median_delta_x = median(dx);
  return run;
}

// --- JSON views -------------------------------------------------------------

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json to_json(const VerifyReport& report) {
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"estimate", finite_or_null(c.estimate)},
                      {"target", finite_or_null(c.target)},
                      {"stderr", finite_or_null(c.std_error)},
                      {"z", finite_or_null(c.z)},
                      {"pass", c.pass},
                      {"hard_fail", c.hard_fail},
                      {"exact", c.exact}});
  }
  return {{"checks", checks},
          {"all_pass", report.all_pass()},
          {"failures", report.failures()},
          {"low_power", report.low_power},
          {"warnings", report.warnings}};
}

json to_json(const PopulationRun& run) {
  json out;
  out["method"] = to_string(run.method);
  out["optimal_reward"] = run.optimal_reward;
  out["final_J"] = run.records.empty() ? json(nullptr) : json(run.records.back().J);
  out["hitting_time"] = run.hitting_time ? json(*run.hitting_time) : json(nullptr);
  out["degenerate_stop"] = run.degenerate_stop;
  out["floored_steps"] = run.floored_steps;
  out["max_recursion_error"] = run.max_recursion_error;
  out["recursion_steps"] = run.recursion_steps;
  out["bound"] = finite_or_null(run.bound.iterations);
  out["bound_note"] = run.bound.note;
  out["within_bound"] = run.within_bound;
  if (run.method == Method::vspo) {
    out["min_gamma"] = finite_or_null(run.min_gamma);
    out["certificate_held"] = run.certificate_held;
  }
  return out;
}

json to_json(const EmpiricalRun& run) {
  json out;
  out["method"] = to_string(run.method);
  out["replications"] = run.replications.size();
  out["final_target_mass"] = run.final_target_mass;
  out["median_final_target_mass"] = run.median_final_target_mass;
  const auto& last = run.summary.back();
  out["final_J"] = {{"q25", last.q25}, {"median", last.median}, {"q75", last.q75}};
  json seeds = json::array();
  for (const auto& r : run.replications) seeds.push_back(r.seed);
  out["replication_seeds"] = seeds;
  return out;
}

json to_json(const LatentRun& run) {
  json seeds = json::array();
  for (const auto& r : run.seeds) {
    seeds.push_back({{"index", r.index},
                     {"seed", r.seed},
                     {"initial_x", r.initial_x},
                     {"initial_y", r.initial_y},
                     {"final_x", r.final_x},
                     {"final_y", r.final_y},
                     {"steering_spearman", r.steering_spearman},
                     {"mixture_deviation_b", r.mixture_deviation_b},
                     {"mixture_deviation_half_b", r.mixture_deviation_half_b},
                     {"behavior_proxy_correlation", r.behavior_proxy_correlation}});
  }
  return {{"seeds", seeds},
          {"median_delta_y", run.median_delta_y},
          {"median_delta_x", run.median_delta_x}};
}

}  // namespace steerbandit
