// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "steerbandit/advantage.hpp"
#include "steerbandit/config.hpp"
#include "steerbandit/experiments.hpp"
#include "steerbandit/latent.hpp"
#include "steerbandit/output.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace steerbandit;

namespace {

const fs::path kData = STEERBANDIT_TEST_DATA;
const std::string kCli = STEERBANDIT_CLI;

struct Outcome {
  bool pass = true;
  std::vector<std::string> notes;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    notes.push_back((ok ? "" : "FAILED ") + what);
  }
};

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.precision(digits);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

RunConfig config_text(const std::string& text) { return parse_config(json::parse(text)); }

int cli(const std::string& args, std::string* captured = nullptr) {
  const std::string cmd = "\"" + kCli + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return -1;
  std::string out;
  char buf[4096];
  std::size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  if (captured) *captured = out;
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// --- 1 ----------------------------------------------------------------------

Outcome monte_carlo_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const RunConfig c = config_text(R"({"mode": "verify", "groups": 200000, "seed": 1})");
  VerifyReport report;
  std::uint64_t index = 0;
  for (const auto& scenario : c.scenarios) {
    for (int g : c.verify_group_sizes) {
      append_monte_carlo_checks(report, scenario, c.contrast, g, c.groups, mix_seed(c.seed, index++));
    }
  }
  const double elapsed = seconds_since(start);
  double worst = 0.0;
  for (const auto& check : report.checks) worst = std::max(worst, std::abs(check.z));
  o.require(c.scenarios.size() == 2 && c.verify_group_sizes == std::vector<int>{2, 4, 8},
            "campaign covers E1 and E3 at G in {2,4,8}");
  o.require(report.all_pass(), std::to_string(report.checks.size() - report.failures()) + "/" +
                                   std::to_string(report.checks.size()) + " checks within 3 se (max |z| " +
                                   fmt(worst, 3) + ")");
  o.require(elapsed < 60.0, "runtime " + fmt(elapsed, 3) + " s");
  return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome identity_suite() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  VerifyReport report;
  append_identity_checks(report, 1000, 1);
  const double elapsed = seconds_since(start);
  for (const auto& check : report.checks) {
    o.require(check.pass, check.name.substr(check.name.find('/') + 1) + " " + fmt(check.estimate, 3));
  }
  o.require(elapsed < 30.0, "runtime " + fmt(elapsed, 3) + " s");
  return o;
}

// --- 3 ----------------------------------------------------------------------

Outcome grpo_bound() {
  Outcome o;
  const RunConfig c = config_text(
      R"({"mode": "population", "preset": "E3", "eta": 1, "G": 2, "eps_target": 0.01, "max_iterations": 20})");
  const auto run = run_population(c, c.scenario(), Method::grpo);
  const int ceiling = static_cast<int>(std::ceil(1.1 / 0.9 * std::log(98.0)));
  o.require(ceiling == 6, "ceil(T_grpo) = " + std::to_string(ceiling));
  o.require(run.hitting_time && *run.hitting_time <= ceiling,
            "hitting time " + (run.hitting_time ? std::to_string(*run.hitting_time) : std::string("none")));
  o.require(run.hitting_time && run.recursion_steps >= *run.hitting_time && run.max_recursion_error <= 1e-12,
            "ratio recursion max rel error " + fmt(run.max_recursion_error, 3) + " over " +
                std::to_string(run.recursion_steps) + " unfloored steps");
  return o;
}

// --- 4 ----------------------------------------------------------------------

Outcome vspo_bound() {
  Outcome o;
  const RunConfig c = config_text(R"({"mode": "population", "method": "vspo", "preset": "E3",
      "contrast": {"kind": "two_sided_split"}, "eta": 1, "G": 2, "eps_target": 0.01, "max_iterations": 50})");
  const auto cert = compute_bounds(c, c.scenario());
  const double t_grpo = cert["T_grpo"].get<double>();
  const double t_vspo = cert["T_vspo"].get<double>();
  const double oracle_grpo = 1.1 / 0.9 * std::log(98.0);
  const double oracle_vspo = 1.2 / (2 * std::sqrt(0.5) * 0.94) * std::log(98.0);
  o.require(std::abs(cert["gamma_t"].get<double>() - 0.49) <= 1e-12, "t=0 gamma 0.49");
  o.require(std::abs(t_vspo - oracle_vspo) <= 1e-9 && std::abs(t_grpo - oracle_grpo) <= 1e-9 && t_vspo < t_grpo,
            "T_vspo " + fmt(t_vspo, 7) + " < T_grpo " + fmt(t_grpo, 7));
  o.require(cert["vspo_faster_guaranteed"].get<bool>() &&
                std::abs(cert["corollary_threshold"].get<double>() - 0.267769) <= 1e-6,
            "corollary threshold " + fmt(cert["corollary_threshold"].get<double>()) + ", guaranteed");

  const auto run = run_population(c, c.scenario(), Method::vspo);
  bool certified = std::all_of(run.records.begin(), run.records.end(),
                               [](const TrajectoryRecord& r) { return r.gamma_t && r.cond2_ok; });
  o.require(certified, "gamma_t certified at every one of " + std::to_string(run.records.size()) + " steps");
  const double ceiling = std::ceil(run.bound.iterations);
  o.require(run.hitting_time && *run.hitting_time <= ceiling,
            "hitting time " + (run.hitting_time ? std::to_string(*run.hitting_time) : std::string("none")) +
                " vs ceil(bound at min gamma " + fmt(run.min_gamma, 4) + ") = " + fmt(ceiling) + "; final J " +
                fmt(run.records.back().J) + ", target " + fmt(run.optimal_reward - 0.01) +
                (run.certificate_held ? "" : "; cond2 failed after t=0"));
  return o;
}

// --- 5 ----------------------------------------------------------------------

Outcome empirical_convergence() {
  Outcome o;
  const std::string text = R"({"mode": "empirical", "preset": "E1", "eta": 0.1, "G": 8,
      "max_iterations": 500, "replications": 20, "seed": 7})";
  const RunConfig c = config_text(text);
  const auto a = run_empirical(c, c.scenario(), Method::grpo);
  const auto b = run_empirical(c, c.scenario(), Method::grpo);
  o.require(a.median_final_target_mass >= 0.9,
            "median final pi(i*) " + fmt(a.median_final_target_mass));
  o.require(replications_csv(a, 3) == replications_csv(b, 3), "in-process rerun bit-identical");

  const fs::path tmp = fs::temp_directory_path() / "steerbandit_acceptance";
  fs::remove_all(tmp);
  const int e1 = cli("run --config \"" + (kData / "e1_empirical.json").string() + "\" --out \"" +
                     (tmp / "a").string() + "\"");
  const int e2 = cli("run --config \"" + (kData / "e1_empirical.json").string() + "\" --out \"" +
                     (tmp / "b").string() + "\"");
  bool same = e1 == 0 && e2 == 0;
  for (const char* f : {"trajectory.csv", "replications.csv", "summary.csv", "report.json", "certificate.json",
                        "convergence.svg"}) {
    same = same && fs::exists(tmp / "a" / f) && read_file(tmp / "a" / f) == read_file(tmp / "b" / f);
  }
  o.require(same, "CLI rerun artifacts byte-identical");
  fs::remove_all(tmp);
  return o;
}

// --- 6 ----------------------------------------------------------------------

double gradient_error(const latent::LatentParams& params, const latent::LatentParams& old,
                      const latent::LatentParams& ref, std::span<const latent::LatentSample> group,
                      std::span<const double> adv, const latent::TrainConfig& cfg) {
  const auto analytic = latent::surrogate_loss_and_grad(params, old, ref, group, adv, cfg);
  latent::LatentParams probe = params;
  double diff = 0.0, na = 0.0, nf = 0.0;
  for (std::size_t p = 0; p < params.parameter_count(); ++p) {
    const double h = 1e-6, keep = probe.parameter(p);
    probe.parameter(p) = keep + h;
    const double up = latent::surrogate_loss_and_grad(probe, old, ref, group, adv, cfg).loss;
    probe.parameter(p) = keep - h;
    const double down = latent::surrogate_loss_and_grad(probe, old, ref, group, adv, cfg).loss;
    probe.parameter(p) = keep;
    const double fd = (up - down) / (2 * h), a = analytic.grad.parameter(p);
    diff += (a - fd) * (a - fd);
    na += a * a;
    nf += fd * fd;
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nf), 1e-8});
}

Outcome latent_suite() {
  Outcome o;
  RandomStream rng(606);
  double worst_grad = 0.0;
  for (int n = 0; n < 20; ++n) {
    latent::InitOptions init;
    init.hidden_dim = 3 + rng.next_u64() % 6;
    const std::size_t k = 3 + rng.next_u64() % 4;
    const auto policy = latent::random_policy(k, init, rng);
    latent::LatentParams params = policy.params;
    for (std::size_t p = 0; p < params.parameter_count(); ++p) params.parameter(p) += rng.uniform(-0.05, 0.05);
    std::vector<latent::LatentSample> group;
    std::vector<double> adv;
    for (int g = 0; g < 5; ++g) {
      group.push_back({rng.next_u64() % k, rng.uniform(-0.3, 0.3), 0.0});
      adv.push_back(rng.uniform(-1.5, 1.5));
    }
    latent::TrainConfig cfg;
    cfg.kl_weight = n % 2 ? rng.uniform(0.01, 0.5) : 0.0;
    worst_grad = std::max(worst_grad, gradient_error(params, policy.params, policy.reference, group, adv, cfg));
  }
  o.require(worst_grad < 1e-4, "(a) gradient max rel error " + fmt(worst_grad, 3));

  const auto rewards = latent::separable_rewards();
  const std::vector<std::size_t> pos{1, 3}, neg{0, 2};
  double worst_zero = 0.0, min_ratio = INFINITY;
  std::vector<double> rhos;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto q = latent::separable_policy(mix_seed(1, seed));
    const auto v = latent::build_vector(q.params, pos, neg, true);
    const auto base = latent::base_distribution(q.params);
    const auto zero = latent::steered_distribution(q.params, v, 0.0);
    for (std::size_t i = 0; i < base.size(); ++i) worst_zero = std::max(worst_zero, std::abs(base[i] - zero[i]));
    for (double b : {0.1, 0.05, 0.025}) {
      min_ratio = std::min(min_ratio, latent::mixture_deviation(q.params, v, b) /
                                          latent::mixture_deviation(q.params, v, b / 2));
    }
    std::vector<double> betas{-0.3, -0.15, 0.0, 0.15, 0.3}, ey;
    for (double b : betas) {
      const auto p = latent::steered_distribution(q.params, v, b);
      ey.push_back(std::inner_product(p.begin(), p.end(), rewards.behavior().begin(), 0.0));
    }
    rhos.push_back(latent::spearman(betas, ey));
  }
  o.require(worst_zero <= 1e-15, "(b) beta=0 deviation " + fmt(worst_zero, 3));
  const double min_rho = *std::min_element(rhos.begin(), rhos.end());
  o.require(min_rho > 0.0, "(c) min Spearman over 20 policies " + fmt(min_rho, 3));
  o.require(min_ratio >= 3.0, "(d) min deviation ratio on halving b " + fmt(min_ratio, 4));

  const auto start = std::chrono::steady_clock::now();
  const RunConfig c = load_config(kData / "latent_separable.json");
  const auto run = run_latent(c);
  const double elapsed = seconds_since(start);
  o.require(run.median_delta_y >= 0.2 && run.median_delta_x >= -0.05 && c.latent.train.iterations <= 2000 &&
                c.latent.seeds == 20 && elapsed < 120.0,
            "(e) median dE[y] " + fmt(run.median_delta_y, 4) + ", dE[x] " + fmt(run.median_delta_x, 4) +
                " over " + std::to_string(run.seeds.size()) + " seeds, " +
                std::to_string(c.latent.train.iterations) + " iterations, " + fmt(elapsed, 3) + " s");
  return o;
}

// --- 7 ----------------------------------------------------------------------

bool keys_sorted(const std::string& text) {
  // nlohmann preserves file order with ordered_json; compare with a sorted re-dump.
  return nlohmann::ordered_json::parse(text).dump() == json::parse(text).dump();
}

Outcome harness_contract() {
  Outcome o;
  const fs::path tmp = fs::temp_directory_path() / "steerbandit_contract";
  fs::remove_all(tmp);
  auto cfg = [](const char* name) { return "\"" + (kData / name).string() + "\""; };
  auto out = [&](const char* name) { return "\"" + (tmp / name).string() + "\""; };

  o.require(cli("run --config " + cfg("e3_grpo.json") + " --out " + out("grpo")) == 0, "passing run exits 0");
  o.require(cli("run --config " + cfg("e3_grpo_short.json") + " --out " + out("short")) == 1,
            "failing check exits 1");
  o.require(cli("run --config " + cfg("bad_unknown_key.json") + " --out " + out("x")) == 2 &&
                cli("run --config " + cfg("bad_syntax.json") + " --out " + out("x")) == 2 &&
                cli("bounds --config " + cfg("missing.json")) == 2 && cli("frobnicate") == 2,
            "config errors exit 2");
  std::string bounds_out;
  o.require(cli("bounds --config " + cfg("e3_vspo.json"), &bounds_out) == 0 && keys_sorted(bounds_out) &&
                json::parse(bounds_out).contains("vspo_faster_guaranteed"),
            "bounds prints sorted JSON");
  o.require(cli("verify --config " + cfg("verify_default.json") + " --groups 20000 --seed 1") == 0,
            "verify exits 0");

  const std::string header = "t,J,pi_1,pi_2,pi_3,gamma_t,delta_t,cond2_ok";
  const bool both = cli("run --config " + cfg("e3_both.json") + " --out " + out("both")) == 1;
  bool files = both;
  for (const char* f : {"trajectory.csv", "trajectory_grpo.csv", "trajectory_vspo.csv", "certificate.json",
                        "report.json", "convergence.svg"}) {
    files = files && fs::exists(tmp / "both" / f);
  }
  o.require(files, "two-method run writes all artifacts");
  if (files) {
    const std::string csv = read_file(tmp / "both" / "trajectory_vspo.csv");
    o.require(csv.substr(0, csv.find('\n')) == header, "CSV header");
    o.require(keys_sorted(read_file(tmp / "both" / "report.json")) &&
                  keys_sorted(read_file(tmp / "both" / "certificate.json")),
              "JSON keys sorted");
    const std::string svg = read_file(tmp / "both" / "convergence.svg");
    o.require(svg.find("data-label=\"grpo\"") != std::string::npos &&
                  svg.find("data-label=\"vspo\"") != std::string::npos && svg.find("log scale") != std::string::npos,
              "SVG has both labeled series and a log-scale gap panel");

    const RunConfig c = load_config(kData / "e3_both.json");
    const auto run = run_population(c, c.scenario(), Method::vspo);
    const auto parsed = parse_trajectory_csv(csv);
    double worst = parsed.records.size() == run.records.size() ? 0.0 : INFINITY;
    for (std::size_t n = 0; std::isfinite(worst) && n < run.records.size(); ++n) {
      const auto& a = run.records[n];
      const auto& b = parsed.records[n];
      if (a.t != b.t || a.cond2_ok != b.cond2_ok) worst = INFINITY;
      worst = std::max(worst, std::abs(a.J - b.J));
      worst = std::max(worst, std::abs(*a.gamma_t - *b.gamma_t));
      worst = std::max(worst, std::abs(*a.delta_t - *b.delta_t));
      for (std::size_t i = 0; i < a.probs.size(); ++i) worst = std::max(worst, std::abs(a.probs[i] - b.probs[i]));
    }
    o.require(worst <= 1e-12, "CSV round-trip max error " + fmt(worst, 3));
  }
  o.require(cli("plot --csv \"" + (tmp / "both" / "trajectory_grpo.csv").string() + "\" --csv \"" +
                (tmp / "both" / "trajectory_vspo.csv").string() + "\" --out " + out("plot.svg") +
                " --optimum 1.5") == 0 &&
                fs::exists(tmp / "plot.svg"),
            "plot renders CSVs");
  fs::remove_all(tmp);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 population-lemma Monte Carlo suite", monte_carlo_suite},
      {"2 exact-identity suite", identity_suite},
      {"3 GRPO bound and ratio recursion on E3", grpo_bound},
      {"4 VSPO bound and corollary on E3", vspo_bound},
      {"5 empirical convergence and determinism on E1", empirical_convergence},
      {"6 latent steering suite", latent_suite},
      {"7 harness contract", harness_contract},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::string detail;
    for (const auto& n : o.notes) detail += (detail.empty() ? "" : "; ") + n;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    failed += o.pass ? 0 : 1;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
