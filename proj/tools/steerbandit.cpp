#include <cmath>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "steerbandit/config.hpp"
#include "steerbandit/errors.hpp"
#include "steerbandit/experiments.hpp"
#include "steerbandit/output.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace steerbandit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

struct Check {
  std::string name;
  bool pass;
};

json checks_json(const std::vector<Check>& checks) {
  json out = json::array();
  for (const auto& c : checks) out.push_back({{"name", c.name}, {"pass", c.pass}});
  return out;
}

int finish(const std::vector<Check>& checks) {
  bool ok = true;
  for (const auto& c : checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << '\n';
    ok = ok && c.pass;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

std::string method_file(const std::string& stem, Method m, bool multi) {
  return multi ? stem + "_" + to_string(m) + ".csv" : stem + ".csv";
}

int run_population_mode(const RunConfig& config, const fs::path& out) {
  const Scenario& scenario = config.scenario();
  const std::size_t k = scenario.instance.arm_count();
  const bool multi = config.methods.size() > 1;
  const double optimum = summarize(scenario.instance).optimal_reward();

  std::vector<Check> checks;
  json runs = json::object();
  std::vector<PlotSeries> series;
  for (Method m : config.methods) {
    const PopulationRun run = run_population(config, scenario, m);
    const std::string name = to_string(m);
    write_file(out / method_file("trajectory", m, multi), trajectory_csv(run.records, k));
    if (m == config.methods.front() && multi) {
      write_file(out / "trajectory.csv", trajectory_csv(run.records, k));
    }
    series.push_back(series_from_records(name, run.records));
    runs[name] = to_json(run);

    const bool reached = run.hitting_time.has_value();
    checks.push_back({name + ": reaches r* - eps", reached});
    checks.push_back({name + ": hitting time within bound", run.within_bound});
    if (m == Method::grpo && config.eta > 0.0) {
      checks.push_back({name + ": ratio recursion to 1e-12 relative",
                        run.max_recursion_error <= 1e-12});
    }
    if (m == Method::vspo) {
      checks.push_back({name + ": gamma-good certificate held before hit", run.certificate_held});
    }
  }
  write_file(out / "certificate.json", dump_json(compute_bounds(config, scenario)));
  json report = {{"mode", to_string(config.mode)},
                 {"scenario", scenario.label},
                 {"runs", runs},
                 {"checks", checks_json(checks)}};
  write_file(out / "report.json", dump_json(report));
  write_file(out / "convergence.svg", convergence_svg(series, optimum));
  return finish(checks);
}

int run_empirical_mode(const RunConfig& config, const fs::path& out) {
  const Scenario& scenario = config.scenario();
  const std::size_t k = scenario.instance.arm_count();
  const bool multi = config.methods.size() > 1;
  const double optimum = summarize(scenario.instance).optimal_reward();

  json runs = json::object();
  std::vector<PlotSeries> series;
  for (Method m : config.methods) {
    const EmpiricalRun run = run_empirical(config, scenario, m);
    const std::string name = to_string(m);
    const auto& first = run.replications.front().records;
    write_file(out / method_file("trajectory", m, multi), trajectory_csv(first, k));
    if (m == config.methods.front() && multi) write_file(out / "trajectory.csv", trajectory_csv(first, k));
    write_file(out / method_file("replications", m, multi), replications_csv(run, k));
    write_file(out / method_file("summary", m, multi), summary_csv(run.summary));
    PlotSeries s;
    s.label = name + " (median)";
    for (const auto& row : run.summary) {
      s.t.push_back(row.t);
      s.J.push_back(row.median);
    }
    series.push_back(std::move(s));
    runs[name] = to_json(run);
  }
  write_file(out / "certificate.json", dump_json(compute_bounds(config, scenario)));
  json report = {{"mode", to_string(config.mode)},
                 {"scenario", scenario.label},
                 {"runs", runs},
                 {"checks", json::array()}};
  write_file(out / "report.json", dump_json(report));
  write_file(out / "convergence.svg", convergence_svg(series, optimum));
  return kExitOk;
}

int run_latent_mode(const RunConfig& config, const fs::path& out) {
  const LatentRun run = run_latent(config);
  std::string csv = "seed_index,iteration,mean_x,mean_y,entropy";
  const std::size_t k = config.scenario().instance.arm_count();
  for (std::size_t i = 1; i <= k; ++i) csv += ",pi_" + std::to_string(i);
  csv += '\n';
  std::vector<double> spearman, ratio;
  for (const auto& s : run.seeds) {
    for (const auto& r : s.train.trajectory) {
      csv += std::to_string(s.index) + ',' + std::to_string(r.iteration) + ',' + format_number(r.mean_x) +
             ',' + format_number(r.mean_y) + ',' + format_number(r.entropy);
      for (double p : r.probs) csv += ',' + format_number(p);
      csv += '\n';
    }
    spearman.push_back(s.steering_spearman);
    ratio.push_back(s.mixture_deviation_half_b > 0.0 ? s.mixture_deviation_b / s.mixture_deviation_half_b
                                                      : INFINITY);
  }
  std::vector<Check> checks{
      {"latent: median steering Spearman > 0", median(spearman) > 0.0},
      {"latent: median mixture-deviation halving ratio >= 3", median(ratio) >= 3.0},
      {"latent: median delta E[y] >= 0.2", run.median_delta_y >= 0.2},
      {"latent: median delta E[x] >= -0.05", run.median_delta_x >= -0.05},
  };
  json report = to_json(run);
  report["checks"] = checks_json(checks);
  report["median_steering_spearman"] = median(spearman);
  report["median_mixture_ratio"] = median(ratio);
  write_file(out / "latent_trajectory.csv", csv);
  write_file(out / "report.json", dump_json(report));
  return finish(checks);
}

int verify_mode(RunConfig config, std::optional<std::size_t> groups, std::optional<std::uint64_t> seed) {
  if (groups) config.groups = *groups;
  if (seed) config.seed = *seed;
  const VerifyReport report = verify_lemmas(config);
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : report.checks) {
    std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " estimate=" << format_number(c.estimate)
              << " target=" << format_number(c.target) << " stderr=" << format_number(c.std_error)
              << " z=" << format_number(c.z) << (c.hard_fail ? " HARD" : "") << '\n';
  }
  std::cout << report.checks.size() - static_cast<std::size_t>(report.failures()) << '/'
            << report.checks.size() << " checks passed\n";
  return report.all_pass() ? kExitOk : kExitCheckFailed;
}

int plot_mode(const std::vector<std::string>& csvs, const fs::path& out, std::optional<double> optimum) {
  std::vector<PlotSeries> series;
  for (const auto& path : csvs) {
    const ParsedTrajectory parsed = parse_trajectory_csv(read_file(path));
    series.push_back(series_from_records(fs::path(path).stem().string(), parsed.records));
  }
  write_file(out, convergence_svg(series, optimum));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steered policy optimization on scalarized bandits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "population or empirical dynamics");
  run->add_option("--config", config_path, "config JSON")->required();
  run->add_option("--out", out_dir, "output directory")->required();

  std::optional<std::size_t> groups;
  std::optional<std::uint64_t> seed;
  auto* verify = app.add_subcommand("verify", "Monte Carlo and exact identity checks");
  verify->add_option("--config", config_path, "config JSON")->required();
  verify->add_option("--groups", groups, "sampled groups per configuration");
  verify->add_option("--seed", seed, "master seed");

  auto* bounds = app.add_subcommand("bounds", "iteration bounds and certificate as JSON");
  bounds->add_option("--config", config_path, "config JSON")->required();

  auto* latent_cmd = app.add_subcommand("latent", "latent steering toy model");
  latent_cmd->add_option("--config", config_path, "config JSON")->required();
  latent_cmd->add_option("--out", out_dir, "output directory")->required();

  std::vector<std::string> csvs;
  std::string svg_out;
  std::optional<double> optimum;
  auto* plot = app.add_subcommand("plot", "render trajectory CSVs to SVG");
  plot->add_option("--csv", csvs, "trajectory CSV (repeatable)")->required();
  plot->add_option("--out", svg_out, "SVG path")->required();
  plot->add_option("--optimum", optimum, "optimal reward for the gap panel");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (plot->parsed()) return plot_mode(csvs, svg_out, optimum);

    const RunConfig config = load_config(config_path);
    if (verify->parsed()) return verify_mode(config, groups, seed);
    if (bounds->parsed()) {
      std::cout << dump_json(compute_bounds(config, config.scenario()));
      return kExitOk;
    }
    if (latent_cmd->parsed()) return run_latent_mode(config, out_dir);

    switch (config.mode) {
      case Mode::population: return run_population_mode(config, out_dir);
      case Mode::empirical: return run_empirical_mode(config, out_dir);
      case Mode::latent: return run_latent_mode(config, out_dir);
      case Mode::verify: return verify_mode(config, std::nullopt, std::nullopt);
      case Mode::bounds:
        write_file(fs::path(out_dir) / "certificate.json",
                   dump_json(compute_bounds(config, config.scenario())));
        return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckFailed;
  }
  return kExitOk;
}
