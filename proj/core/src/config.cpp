#include "iher/config.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>

namespace iher {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& v, const std::string& key, std::vector<std::string>& errors) {
  try {
    std::size_t pos = 0;
    const long long out = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    errors.push_back(key + ": expected integer, got '" + v + "'");
    return 0;
  }
}

double parse_real(const std::string& v, const std::string& key, std::vector<std::string>& errors) {
  try {
    std::size_t pos = 0;
    const double out = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    errors.push_back(key + ": expected real number, got '" + v + "'");
    return 0.0;
  }
}

bool parse_bool(const std::string& v, const std::string& key, std::vector<std::string>& errors) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  errors.push_back(key + ": expected 0/1/true/false, got '" + v + "'");
  return false;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key, std::vector<std::string>& errors) {
  std::vector<int> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) {
      errors.push_back(key + ": empty element in list '" + v + "'");
      return out;
    }
    out.push_back(static_cast<int>(parse_int(item, key, errors)));
  }
  if (out.empty()) errors.push_back(key + ": empty list");
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

using Setter = std::function<void(TrainConfig&, const std::string&, std::vector<std::string>&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"task", [](TrainConfig& c, const std::string& v, std::vector<std::string>&) { c.task = v; }},
      {"algo", [](TrainConfig& c, const std::string& v, std::vector<std::string>&) { c.algo = v; }},
      {"ablation", [](TrainConfig& c, const std::string& v, std::vector<std::string>&) { c.ablation = v; }},
      {"seed",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.seed = static_cast<std::uint64_t>(parse_int(v, "seed", e));
       }},
      {"epochs", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.epochs = static_cast<int>(parse_int(v, "epochs", e)); }},
      {"cycles", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.cycles = static_cast<int>(parse_int(v, "cycles", e)); }},
      {"batches_per_cycle",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.batches_per_cycle = static_cast<int>(parse_int(v, "batches_per_cycle", e));
       }},
      {"real_episodes_per_epoch",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.real_episodes_per_epoch = static_cast<int>(parse_int(v, "real_episodes_per_epoch", e));
       }},
      {"imag_episodes_per_cycle",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.imag_episodes_per_cycle = static_cast<int>(parse_int(v, "imag_episodes_per_cycle", e));
       }},
      {"model_train_steps",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.model_train_steps = parse_int(v, "model_train_steps", e); }},
      {"ensemble_size",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.ensemble_size = static_cast<int>(parse_int(v, "ensemble_size", e)); }},
      {"model_bias", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.model_bias = parse_real(v, "model_bias", e); }},
      {"model_lr", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.model_lr = parse_real(v, "model_lr", e); }},
      {"model_batch_size",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.model_batch_size = static_cast<int>(parse_int(v, "model_batch_size", e));
       }},
      {"model_hidden",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.model_hidden = parse_int_list(v, "model_hidden", e); }},
      {"intrinsic_scale",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.intrinsic_scale = parse_real(v, "intrinsic_scale", e); }},
      {"intrinsic_clip",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.intrinsic_clip = parse_real(v, "intrinsic_clip", e); }},
      {"curiosity_raw_space",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.curiosity_raw_space = parse_bool(v, "curiosity_raw_space", e); }},
      {"replay_k", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.replay_k = static_cast<int>(parse_int(v, "replay_k", e)); }},
      {"real_buffer_capacity",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.real_buffer_capacity = static_cast<std::size_t>(parse_int(v, "real_buffer_capacity", e));
       }},
      {"imag_buffer_capacity",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.imag_buffer_capacity = static_cast<std::size_t>(parse_int(v, "imag_buffer_capacity", e));
       }},
      {"batch_size",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.batch_size = static_cast<int>(parse_int(v, "batch_size", e)); }},
      {"snapshot_cadence",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) {
         c.snapshot_cadence = static_cast<int>(parse_int(v, "snapshot_cadence", e));
       }},
      {"flip_fraction",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.flip_fraction = parse_real(v, "flip_fraction", e); }},
      {"gamma", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.gamma = parse_real(v, "gamma", e); }},
      {"polyak", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.polyak = parse_real(v, "polyak", e); }},
      {"actor_lr", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.actor_lr = parse_real(v, "actor_lr", e); }},
      {"critic_lr", [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.critic_lr = parse_real(v, "critic_lr", e); }},
      {"random_action_prob",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.random_action_prob = parse_real(v, "random_action_prob", e); }},
      {"action_noise_std",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.action_noise_std = parse_real(v, "action_noise_std", e); }},
      {"action_penalty",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.action_penalty = parse_real(v, "action_penalty", e); }},
      {"normalizer_clip",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.normalizer_clip = parse_real(v, "normalizer_clip", e); }},
      {"actor_hidden",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.actor_hidden = parse_int_list(v, "actor_hidden", e); }},
      {"critic_hidden",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.critic_hidden = parse_int_list(v, "critic_hidden", e); }},
      {"episode_length",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.episode_length = static_cast<int>(parse_int(v, "episode_length", e)); }},
      {"success_tolerance",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.success_tolerance = parse_real(v, "success_tolerance", e); }},
      {"eval_episodes",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.eval_episodes = static_cast<int>(parse_int(v, "eval_episodes", e)); }},
      {"early_stop_success",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.early_stop_success = parse_real(v, "early_stop_success", e); }},
      {"rollout_workers",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.rollout_workers = static_cast<int>(parse_int(v, "rollout_workers", e)); }},
      {"record_wall_clock",
       [](TrainConfig& c, const std::string& v, std::vector<std::string>& e) { c.record_wall_clock = parse_bool(v, "record_wall_clock", e); }},
  };
  return table;
}

}  // namespace

ParsedConfig parse_config_text(const std::string& text) {
  ParsedConfig parsed;
  std::vector<std::string> errors;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected 'key = value', got '" + t + "'");
      continue;
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) {
      errors.push_back("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
      continue;
    }
    if (parsed.explicit_keys.count(key)) {
      errors.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
      continue;
    }
    it->second(parsed.config, value, errors);
    parsed.explicit_keys.insert(key);
  }
  if (!errors.empty()) {
    std::string msg = "config errors:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return parsed;
}

ParsedConfig parse_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file: " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

void set_config_key(ParsedConfig& parsed, const std::string& key, const std::string& value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw std::invalid_argument("unknown config key '" + key + "'");
  std::vector<std::string> errors;
  it->second(parsed.config, value, errors);
  if (!errors.empty()) throw std::invalid_argument(errors.front());
  parsed.explicit_keys.insert(key);
}

TrainConfig finalize_config(ParsedConfig parsed) {
  TrainConfig& c = parsed.config;
  const auto set_default = [&](const std::string& key, auto member, auto value) {
    if (!parsed.explicit_keys.count(key)) c.*member = value;
  };

  // task-dependent schedule defaults
  if (c.task == "point-push" || c.task == "point-slide") {
    set_default("epochs", &TrainConfig::epochs, 50);
    set_default("cycles", &TrainConfig::cycles, 50);
    set_default("real_episodes_per_epoch", &TrainConfig::real_episodes_per_epoch, 8);
    set_default("model_train_steps", &TrainConfig::model_train_steps, 300L);
  }

  std::vector<std::string> errors;
  const auto require = [&](bool ok, const std::string& msg) {
    if (!ok) errors.push_back(msg);
  };

  require(c.task == "point-reach" || c.task == "point-push" || c.task == "point-slide",
          "task: unknown task '" + c.task + "' (valid: point-reach, point-push, point-slide)");
  require(c.algo == "iher" || c.algo == "her", "algo: must be 'iher' or 'her', got '" + c.algo + "'");
  require(c.ablation == "none" || c.ablation == "no_distinguish" || c.ablation == "no_regen" ||
              c.ablation == "no_intrinsic",
          "ablation: unknown ablation '" + c.ablation +
              "' (valid: none, no_distinguish, no_regen, no_intrinsic)");
  require(c.epochs > 0, "epochs: must be positive");
  require(c.cycles > 0, "cycles: must be positive");
  require(c.batches_per_cycle > 0, "batches_per_cycle: must be positive");
  require(c.real_episodes_per_epoch > 0, "real_episodes_per_epoch: must be positive");
  require(c.imag_episodes_per_cycle > 0, "imag_episodes_per_cycle: must be positive");
  require(c.model_train_steps > 0, "model_train_steps: must be positive");
  require(c.ensemble_size > 0, "ensemble_size: must be positive");
  require(c.model_bias >= 1.0, "model_bias: must be >= 1");
  require(c.model_lr > 0.0, "model_lr: must be positive");
  require(c.model_batch_size > 0, "model_batch_size: must be positive");
  require(!c.model_hidden.empty(), "model_hidden: must name at least one layer width");
  require(c.intrinsic_scale >= 0.0, "intrinsic_scale: must be non-negative");
  require(c.intrinsic_clip > 0.0, "intrinsic_clip: must be positive");
  require(c.replay_k >= 0, "replay_k: must be non-negative");
  require(c.batch_size > 0, "batch_size: must be positive");
  require(c.snapshot_cadence > 0, "snapshot_cadence: must be positive");
  require(c.flip_fraction >= 0.0 && c.flip_fraction <= 1.0, "flip_fraction: must be in [0, 1]");
  require(c.gamma > 0.0 && c.gamma < 1.0, "gamma: must be in (0, 1)");
  require(c.polyak >= 0.0 && c.polyak <= 1.0, "polyak: must be in [0, 1]");
  require(c.actor_lr > 0.0, "actor_lr: must be positive");
  require(c.critic_lr > 0.0, "critic_lr: must be positive");
  require(c.random_action_prob >= 0.0 && c.random_action_prob <= 1.0, "random_action_prob: must be in [0, 1]");
  require(c.action_noise_std >= 0.0, "action_noise_std: must be non-negative");
  require(c.action_penalty >= 0.0, "action_penalty: must be non-negative");
  require(c.normalizer_clip > 0.0, "normalizer_clip: must be positive");
  require(!c.actor_hidden.empty(), "actor_hidden: must name at least one layer width");
  require(!c.critic_hidden.empty(), "critic_hidden: must name at least one layer width");
  require(c.episode_length > 0, "episode_length: must be positive");
  require(c.success_tolerance > 0.0, "success_tolerance: must be positive");
  require(c.eval_episodes > 0, "eval_episodes: must be positive");
  require(c.early_stop_success >= 0.0 && c.early_stop_success <= 1.0, "early_stop_success: must be in [0, 1]");
  require(c.rollout_workers >= 0, "rollout_workers: must be non-negative");
  require(c.real_buffer_capacity >= static_cast<std::size_t>(std::max(c.episode_length, 1)),
          "real_buffer_capacity: below one episode");
  require(c.imag_buffer_capacity >= static_cast<std::size_t>(std::max(c.episode_length, 1)),
          "imag_buffer_capacity: below one episode");
  for (int h : c.actor_hidden) require(h > 0, "actor_hidden: widths must be positive");
  for (int h : c.critic_hidden) require(h > 0, "critic_hidden: widths must be positive");
  for (int h : c.model_hidden) require(h > 0, "model_hidden: widths must be positive");

  if (!errors.empty()) {
    std::string msg = "config validation failed:";
    for (const std::string& e : errors) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  return c;
}

std::string config_to_text(const TrainConfig& c) {
  std::string out;
  const auto kv = [&out](const std::string& k, const std::string& v) { out += k + " = " + v + "\n"; };
  kv("task", c.task);
  kv("algo", c.algo);
  kv("ablation", c.ablation);
  kv("seed", std::to_string(c.seed));
  kv("epochs", std::to_string(c.epochs));
  kv("cycles", std::to_string(c.cycles));
  kv("batches_per_cycle", std::to_string(c.batches_per_cycle));
  kv("real_episodes_per_epoch", std::to_string(c.real_episodes_per_epoch));
  kv("imag_episodes_per_cycle", std::to_string(c.imag_episodes_per_cycle));
  kv("model_train_steps", std::to_string(c.model_train_steps));
  kv("ensemble_size", std::to_string(c.ensemble_size));
  kv("model_bias", format_double(c.model_bias));
  kv("model_lr", format_double(c.model_lr));
  kv("model_batch_size", std::to_string(c.model_batch_size));
  kv("model_hidden", join_ints(c.model_hidden));
  kv("intrinsic_scale", format_double(c.intrinsic_scale));
  kv("intrinsic_clip", format_double(c.intrinsic_clip));
  kv("curiosity_raw_space", c.curiosity_raw_space ? "1" : "0");
  kv("replay_k", std::to_string(c.replay_k));
  kv("real_buffer_capacity", std::to_string(c.real_buffer_capacity));
  kv("imag_buffer_capacity", std::to_string(c.imag_buffer_capacity));
  kv("batch_size", std::to_string(c.batch_size));
  kv("snapshot_cadence", std::to_string(c.snapshot_cadence));
  kv("flip_fraction", format_double(c.flip_fraction));
  kv("gamma", format_double(c.gamma));
  kv("polyak", format_double(c.polyak));
  kv("actor_lr", format_double(c.actor_lr));
  kv("critic_lr", format_double(c.critic_lr));
  kv("random_action_prob", format_double(c.random_action_prob));
  kv("action_noise_std", format_double(c.action_noise_std));
  kv("action_penalty", format_double(c.action_penalty));
  kv("normalizer_clip", format_double(c.normalizer_clip));
  kv("actor_hidden", join_ints(c.actor_hidden));
  kv("critic_hidden", join_ints(c.critic_hidden));
  kv("episode_length", std::to_string(c.episode_length));
  kv("success_tolerance", format_double(c.success_tolerance));
  kv("eval_episodes", std::to_string(c.eval_episodes));
  kv("early_stop_success", format_double(c.early_stop_success));
  kv("rollout_workers", std::to_string(c.rollout_workers));
  kv("record_wall_clock", c.record_wall_clock ? "1" : "0");
  return out;
}

}  // namespace iher
