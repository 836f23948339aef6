#include "steerbandit/config.hpp"

#include <fstream>
#include <set>

#include "steerbandit/errors.hpp"

namespace steerbandit {

using nlohmann::json;

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::population: return "population";
    case Mode::empirical: return "empirical";
    case Mode::latent: return "latent";
    case Mode::verify: return "verify";
    case Mode::bounds: return "bounds";
  }
  return "unknown";
}

std::string to_string(Method method) { return method == Method::grpo ? "grpo" : "vspo"; }

Preset named_preset(const std::string& name) {
  if (name == "E1") {
    return {name, BanditInstance::create({1.0, 0.8, 0.2}, {0.0, 1.0, 1.0}, 1.0), Policy::uniform(3)};
  }
  if (name == "E3") {
    return {name, BanditInstance::create({0.6, 0.4, 0.5}, {0.0, 0.0, 1.0}, 1.0),
            Policy::initial({0.3, 0.2, 0.5})};
  }
  if (name == "separable") {
    const RewardTable rewards = latent::separable_rewards();
    return {name, BanditInstance::create(rewards, 1.0), Policy::uniform(4)};
  }
  throw ConfigError("unknown preset '" + name + "' (expected E1, E3 or separable)");
}

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("'") + key + "' must be a number");
  return obj[key].get<double>();
}

std::int64_t integer(const json& obj, const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) {
    throw ConfigError(std::string("'") + key + "' must be an integer");
  }
  return obj[key].get<std::int64_t>();
}

std::vector<double> number_list(const json& value, const std::string& what) {
  if (!value.is_array()) throw ConfigError(what + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : value) {
    if (!v.is_number()) throw ConfigError(what + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Method parse_method(const json& v) {
  if (!v.is_string()) throw ConfigError("method entries must be strings");
  const auto s = v.get<std::string>();
  if (s == "grpo") return Method::grpo;
  if (s == "vspo") return Method::vspo;
  throw ConfigError("unknown method '" + s + "' (expected grpo or vspo)");
}

Mode parse_mode(const json& v) {
  if (!v.is_string()) throw ConfigError("'mode' must be a string");
  const auto s = v.get<std::string>();
  for (Mode m : {Mode::population, Mode::empirical, Mode::latent, Mode::verify, Mode::bounds}) {
    if (to_string(m) == s) return m;
  }
  throw ConfigError("unknown mode '" + s + "'");
}

ContrastSpec parse_contrast(const json& obj) {
  reject_unknown(obj, {"kind", "strength", "c"}, "contrast");
  if (!obj.contains("kind") || !obj["kind"].is_string()) {
    throw ConfigError("contrast needs a string 'kind'");
  }
  const auto kind = obj["kind"].get<std::string>();
  const double strength = number(obj, "strength", 1.0);
  if (kind != "custom" && obj.contains("c")) throw ConfigError("'c' is only valid for custom contrasts");
  if (kind == "y_tilt" || kind == "r_tilt") {
    if (!(strength >= 0.0 && strength <= 1.0)) throw ConfigError("contrast strength must lie in [0, 1]");
    if (kind == "y_tilt") return YTilt{strength};
    return RTilt{strength};
  }
  if (obj.contains("strength")) throw ConfigError("'strength' applies only to tilt contrasts");
  if (kind == "two_sided_split") return TwoSidedSplit{};
  if (kind == "custom") {
    if (!obj.contains("c")) throw ConfigError("custom contrast needs 'c'");
    return CustomContrast{number_list(obj["c"], "contrast.c")};
  }
  throw ConfigError("unknown contrast kind '" + kind + "'");
}

LatentSettings parse_latent(const json& obj) {
  reject_unknown(obj,
                 {"hidden_dim", "learning_rate", "clip_ratio", "kl_weight", "iterations",
                  "updates_per_group", "intensities", "behavior_weight", "normalize_vector",
                  "plant_strength", "seeds"},
                 "latent");
  LatentSettings s;
  const auto hidden = integer(obj, "hidden_dim", 8);
  if (hidden < 1) throw ConfigError("latent.hidden_dim must be positive");
  s.hidden_dim = static_cast<std::size_t>(hidden);
  s.train.learning_rate = number(obj, "learning_rate", s.train.learning_rate);
  s.train.clip_ratio = number(obj, "clip_ratio", s.train.clip_ratio);
  s.train.kl_weight = number(obj, "kl_weight", s.train.kl_weight);
  s.train.iterations = static_cast<int>(integer(obj, "iterations", s.train.iterations));
  s.train.updates_per_group = static_cast<int>(integer(obj, "updates_per_group", 1));
  if (obj.contains("intensities")) {
    s.schedule.intensities = number_list(obj["intensities"], "latent.intensities");
  }
  s.schedule.behavior_weight = number(obj, "behavior_weight", s.schedule.behavior_weight);
  if (obj.contains("normalize_vector")) {
    if (!obj["normalize_vector"].is_boolean()) throw ConfigError("latent.normalize_vector must be a boolean");
    s.normalize_vector = obj["normalize_vector"].get<bool>();
  }
  s.plant_strength = number(obj, "plant_strength", s.plant_strength);
  s.seeds = static_cast<int>(integer(obj, "seeds", s.seeds));
  if (s.seeds < 1) throw ConfigError("latent.seeds must be at least 1");
  if (s.schedule.intensities.size() < 2) throw ConfigError("latent.intensities needs at least two entries");
  if (!(s.schedule.behavior_weight >= 0.0)) throw ConfigError("latent.behavior_weight must be nonnegative");
  try {
    s.train.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("latent: ") + e.what());
  }
  return s;
}

Scenario explicit_scenario(const json& inst, const json& doc) {
  reject_unknown(inst, {"x", "y", "alpha"}, "instance");
  if (!inst.contains("x") || !inst.contains("y") || !inst.contains("alpha")) {
    throw ConfigError("instance needs 'x', 'y' and 'alpha'");
  }
  auto instance = BanditInstance::create(number_list(inst["x"], "instance.x"),
                                         number_list(inst["y"], "instance.y"),
                                         number(inst, "alpha", 0.0));
  Policy initial = Policy::uniform(instance.arm_count());
  if (doc.contains("initial_policy")) {
    initial = Policy::initial(number_list(doc["initial_policy"], "initial_policy"));
  }
  return {"custom", std::move(instance), std::move(initial)};
}

}  // namespace

RunConfig parse_config(const json& doc) {
  reject_unknown(doc,
                 {"mode", "method", "preset", "presets", "instance", "initial_policy", "contrast",
                  "eta", "G", "group_sizes", "eps_target", "max_iterations", "seed",
                  "replications", "groups", "identity_draws", "latent"},
                 "config");
  RunConfig cfg;
  try {
    if (!doc.contains("mode")) throw ConfigError("config needs 'mode'");
    cfg.mode = parse_mode(doc["mode"]);
    if (doc.contains("method")) {
      cfg.methods.clear();
      if (doc["method"].is_array()) {
        for (const auto& m : doc["method"]) cfg.methods.push_back(parse_method(m));
      } else {
        cfg.methods.push_back(parse_method(doc["method"]));
      }
      if (cfg.methods.empty()) throw ConfigError("'method' must name at least one method");
    }

    const int sources = int(doc.contains("preset")) + int(doc.contains("presets")) +
                        int(doc.contains("instance"));
    if (sources > 1) throw ConfigError("give at most one of 'preset', 'presets' and 'instance'");
    std::vector<std::string> preset_names;
    if (doc.contains("preset")) {
      if (!doc["preset"].is_string()) throw ConfigError("'preset' must be a string");
      preset_names.push_back(doc["preset"].get<std::string>());
    } else if (doc.contains("presets")) {
      if (!doc["presets"].is_array()) throw ConfigError("'presets' must be an array");
      for (const auto& p : doc["presets"]) {
        if (!p.is_string()) throw ConfigError("'presets' entries must be strings");
        preset_names.push_back(p.get<std::string>());
      }
    }
    const bool default_campaign = sources == 0 && cfg.mode == Mode::verify;
    if (default_campaign) preset_names = {"E1", "E3"};
    if (sources == 0 && !default_campaign) {
      preset_names = {cfg.mode == Mode::latent ? "separable" : "E3"};
    }
    if (doc.contains("instance")) {
      cfg.scenarios.push_back(explicit_scenario(doc["instance"], doc));
    } else {
      for (const auto& name : preset_names) {
        Preset p = named_preset(name);
        Policy initial = p.initial_policy;
        if (doc.contains("initial_policy")) {
          initial = Policy::initial(number_list(doc["initial_policy"], "initial_policy"));
        }
        cfg.scenarios.push_back({name, std::move(p.instance), std::move(initial)});
      }
    }
    if (cfg.scenarios.empty()) throw ConfigError("no instance selected");
    for (const auto& s : cfg.scenarios) {
      if (s.initial_policy.size() != s.instance.arm_count()) {
        throw ConfigError("initial_policy length differs from the instance's arm count");
      }
    }

    if (doc.contains("contrast")) cfg.contrast = parse_contrast(doc["contrast"]);
    cfg.eta = number(doc, "eta", cfg.eta);
    if (!(cfg.eta >= 0.0)) throw ConfigError("'eta' must be nonnegative");
    cfg.group_size = static_cast<int>(integer(doc, "G", cfg.group_size));
    if (cfg.group_size < 2) throw ConfigError("'G' must be at least 2");
    if (doc.contains("group_sizes")) {
      for (double g : number_list(doc["group_sizes"], "group_sizes")) {
        if (g < 2 || g != static_cast<int>(g)) throw ConfigError("group_sizes entries must be integers >= 2");
        cfg.verify_group_sizes.push_back(static_cast<int>(g));
      }
    } else if (default_campaign) {
      cfg.verify_group_sizes = {2, 4, 8};
    } else {
      cfg.verify_group_sizes = {cfg.group_size};
    }
    cfg.eps_target = number(doc, "eps_target", cfg.eps_target);
    if (!(cfg.eps_target > 0.0)) throw ConfigError("'eps_target' must be positive");
    cfg.max_iterations = static_cast<int>(integer(doc, "max_iterations", cfg.max_iterations));
    if (cfg.max_iterations < 0) throw ConfigError("'max_iterations' must be nonnegative");
    const auto seed = integer(doc, "seed", 1);
    if (seed < 0) throw ConfigError("'seed' must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
    cfg.replications = static_cast<int>(integer(doc, "replications", cfg.replications));
    if (cfg.replications < 1) throw ConfigError("'replications' must be at least 1");
    const auto groups = integer(doc, "groups", static_cast<std::int64_t>(cfg.groups));
    if (groups < 1) throw ConfigError("'groups' must be positive");
    cfg.groups = static_cast<std::size_t>(groups);
    cfg.identity_draws = static_cast<int>(integer(doc, "identity_draws", cfg.identity_draws));
    if (cfg.identity_draws < 0) throw ConfigError("'identity_draws' must be nonnegative");
    if (doc.contains("latent")) cfg.latent = parse_latent(doc["latent"]);

    const bool needs_even = std::find(cfg.methods.begin(), cfg.methods.end(), Method::vspo) !=
                            cfg.methods.end();
    if (needs_even && cfg.mode == Mode::empirical && cfg.group_size % 2 != 0) {
      throw ConfigError("VSPO needs an even group size");
    }
    if (cfg.mode == Mode::verify) {
      for (int g : cfg.verify_group_sizes) {
        if (g % 2 != 0) throw ConfigError("verify group sizes must be even (VSPO halves)");
      }
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace steerbandit
