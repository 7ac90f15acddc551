// Copyright 2026 The skillab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skillab/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace skillab {
namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + value + "'");
  }
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long v = std::stol(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return static_cast<std::uint64_t>(v);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" +
                      value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config: key '" + key + "' expects true/false, got '" + value + "'");
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, trim(item)));
  return out;
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, trim(item)));
  return out;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(v[i]);
  }
  return out;
}

std::string format_double_list(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += format_double(v[i]);
  }
  return out;
}

// One table drives parse, override, and serialize so the three can never
// disagree about the set of known keys.
struct KeyHandler {
  std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

const std::vector<std::pair<std::string, KeyHandler>>& key_table() {
  auto d = [](auto member) {
    return KeyHandler{
        [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*member = parse_double(k, v);
        },
        [member](const ExperimentConfig& c) { return format_double(c.*member); }};
  };
  auto i = [](auto member) {
    return KeyHandler{
        [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*member = parse_int(k, v);
        },
        [member](const ExperimentConfig& c) { return std::to_string(c.*member); }};
  };
  auto b = [](auto member) {
    return KeyHandler{
        [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*member = parse_bool(k, v);
        },
        [member](const ExperimentConfig& c) { return c.*member ? "true" : "false"; }};
  };
  auto s = [](auto member) {
    return KeyHandler{
        [member](ExperimentConfig& c, const std::string&, const std::string& v) {
          c.*member = v;
        },
        [member](const ExperimentConfig& c) { return c.*member; }};
  };
  auto il = [](auto member) {
    return KeyHandler{
        [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*member = parse_int_list(k, v);
        },
        [member](const ExperimentConfig& c) { return format_int_list(c.*member); }};
  };
  auto dl = [](auto member) {
    return KeyHandler{
        [member](ExperimentConfig& c, const std::string& k, const std::string& v) {
          c.*member = parse_double_list(k, v);
        },
        [member](const ExperimentConfig& c) { return format_double_list(c.*member); }};
  };

  using C = ExperimentConfig;
  static const std::vector<std::pair<std::string, KeyHandler>> table = {
      {"run.seed",
       {[](C& c, const std::string& k, const std::string& v) { c.seed = parse_u64(k, v); },
        [](const C& c) { return std::to_string(c.seed); }}},
      {"run.updates", i(&C::updates)},
      {"run.checkpoint_every", i(&C::checkpoint_every)},
      {"run.precision", s(&C::precision)},

      {"env.kind", s(&C::env_kind)},
      {"env.num_envs", i(&C::num_envs)},
      {"env.episode_steps", i(&C::episode_steps)},
      {"env.dt", d(&C::dt)},
      {"env.max_accel", d(&C::max_accel)},
      {"env.max_turn_rate", d(&C::max_turn_rate)},
      {"env.damping", d(&C::damping)},
      {"env.w_action_rate", d(&C::w_action_rate)},
      {"env.w_energy", d(&C::w_energy)},
      {"env.w_speed", d(&C::w_speed)},
      {"env.v_soft", d(&C::v_soft)},
      {"env.terminate_out_of_bounds", b(&C::terminate_out_of_bounds)},
      {"env.arena_half_width", d(&C::arena_half_width)},
      {"env.state_weights", dl(&C::state_weights)},

      {"objective.kind", s(&C::objective_kind)},
      {"objective.skill_dim", i(&C::skill_dim)},
      {"objective.z_max", d(&C::z_max)},
      {"objective.sigma", d(&C::sigma)},
      {"objective.beta", d(&C::beta)},
      {"objective.skill_sampling", s(&C::skill_sampling)},
      {"objective.lambda_init", d(&C::lambda_init)},
      {"objective.lambda_lr", d(&C::lambda_lr)},
      {"objective.lambda_slack", d(&C::lambda_slack)},
      {"objective.encoder_lr", d(&C::encoder_lr)},
      {"objective.encoder_hidden", il(&C::encoder_hidden)},
      {"objective.encoder_activation", s(&C::encoder_activation)},

      {"ppo.clip_ratio", d(&C::clip_ratio)},
      {"ppo.value_clip_ratio", d(&C::value_clip_ratio)},
      {"ppo.entropy_coef", d(&C::entropy_coef)},
      {"ppo.value_coef", d(&C::value_coef)},
      {"ppo.gamma", d(&C::gamma)},
      {"ppo.gae_lambda", d(&C::gae_lambda)},
      {"ppo.epochs", i(&C::epochs)},
      {"ppo.minibatches", i(&C::minibatches)},
      {"ppo.kl_target", d(&C::kl_target)},
      {"ppo.lr_init", d(&C::lr_init)},
      {"ppo.lr_min", d(&C::lr_min)},
      {"ppo.lr_max", d(&C::lr_max)},
      {"ppo.policy_hidden", il(&C::policy_hidden)},
      {"ppo.policy_activation", s(&C::policy_activation)},
      {"ppo.value_hidden", il(&C::value_hidden)},
      {"ppo.value_activation", s(&C::value_activation)},
      {"ppo.init_log_std", d(&C::init_log_std)},
      {"ppo.log_std_min", d(&C::log_std_min)},
      {"ppo.log_std_max", d(&C::log_std_max)},
      {"ppo.policy_final_layer_scale", d(&C::policy_final_layer_scale)},
      {"ppo.w_intrinsic", d(&C::w_intrinsic)},
      {"ppo.w_extrinsic", d(&C::w_extrinsic)},
      {"ppo.normalize_advantages", b(&C::normalize_advantages)},
      {"ppo.obs_scale_pos", d(&C::obs_scale_pos)},
      {"ppo.obs_scale_vel", d(&C::obs_scale_vel)},
      {"ppo.obs_scale_ang", d(&C::obs_scale_ang)},
      {"ppo.obs_scale_skill", d(&C::obs_scale_skill)},

      {"eval.trajectories", i(&C::eval_trajectories)},
      {"eval.hist_bins", i(&C::hist_bins)},
      {"eval.hist_min", d(&C::hist_min)},
      {"eval.hist_max", d(&C::hist_max)},
      {"eval.coverage_cell", d(&C::coverage_cell)},
      {"eval.deterministic_actions", b(&C::eval_deterministic_actions)},

      {"track.gain", d(&C::track_gain)},
      {"track.tolerance", d(&C::track_tolerance)},
      {"track.heading_tolerance", d(&C::track_heading_tolerance)},
      {"track.hold_steps", i(&C::track_hold_steps)},
      {"track.max_steps", i(&C::track_max_steps)},
      {"track.desired_velocity", s(&C::track_desired_velocity)},
  };
  return table;
}

const KeyHandler* find_key(const std::string& full_key) {
  for (const auto& [key, handler] : key_table()) {
    if (key == full_key) return &handler;
  }
  return nullptr;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("config line " + std::to_string(line_number) +
                          ": malformed section header '" + line + "'");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": expected 'key = value', got '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string full_key = section.empty() ? key : section + "." + key;
    const KeyHandler* handler = find_key(full_key);
    if (handler == nullptr) {
      throw ConfigError("config line " + std::to_string(line_number) +
                        ": unknown key '" + full_key + "'");
    }
    handler->set(cfg, full_key, value);
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override '" + assignment + "': expected section.key=value");
  }
  const std::string key = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const KeyHandler* handler = find_key(key);
  if (handler == nullptr) throw ConfigError("override: unknown key '" + key + "'");
  handler->set(*this, key, value);
}

std::string ExperimentConfig::serialize() const {
  std::string out;
  std::string section;
  for (const auto& [key, handler] : key_table()) {
    const auto dot = key.find('.');
    const std::string key_section = key.substr(0, dot);
    if (key_section != section) {
      if (!section.empty()) out += "\n";
      out += "[" + key_section + "]\n";
      section = key_section;
    }
    out += key.substr(dot + 1) + " = " + handler.get(*this) + "\n";
  }
  return out;
}

EnvKind ExperimentConfig::parsed_env_kind() const {
  if (env_kind == "point_mass") return EnvKind::kPointMass;
  if (env_kind == "unicycle") return EnvKind::kUnicycle;
  throw ConfigError("env.kind: unknown environment '" + env_kind + "'");
}

ObjectiveKind ExperimentConfig::parsed_objective_kind() const {
  if (objective_kind == "ours") return ObjectiveKind::kOurs;
  if (objective_kind == "lsd") return ObjectiveKind::kLsd;
  if (objective_kind == "metra") return ObjectiveKind::kMetra;
  throw ConfigError("objective.kind: unknown objective '" + objective_kind + "'");
}

SkillSampling ExperimentConfig::parsed_skill_sampling() const {
  if (skill_sampling == "uniform_ball") return SkillSampling::kUniformBall;
  if (skill_sampling == "uniform_radius") return SkillSampling::kUniformRadius;
  throw ConfigError("objective.skill_sampling: unknown mode '" + skill_sampling + "'");
}

DistanceMetric ExperimentConfig::implied_distance_metric() const {
  return parsed_objective_kind() == ObjectiveKind::kMetra ? DistanceMetric::kTemporal
                                                          : DistanceMetric::kEuclidean;
}

Activation ExperimentConfig::parsed_activation(const std::string& name) const {
  if (name == "relu") return Activation::kRelu;
  if (name == "elu") return Activation::kElu;
  throw ConfigError("unknown activation '" + name + "' (expected relu or elu)");
}

void ExperimentConfig::validate() const {
  if (precision != "double" && precision != "single") {
    throw ConfigError("run.precision must be 'double' or 'single'");
  }
  if (updates < 0) throw ConfigError("run.updates must be >= 0");
  if (checkpoint_every < 1) throw ConfigError("run.checkpoint_every must be >= 1");

  env_config<double>().validate();      // also resolves env.kind
  objective_config<double>().validate(); // also resolves objective.kind/sampling
  if (sigma < 0) throw ConfigError("objective.sigma must be >= 0 (0 = auto)");
  if (lambda_init < 0) throw ConfigError("objective.lambda_init must be >= 0");
  if (lambda_lr <= 0) throw ConfigError("objective.lambda_lr must be positive");
  if (lambda_slack < 0) throw ConfigError("objective.lambda_slack must be >= 0");
  if (encoder_lr <= 0) throw ConfigError("objective.encoder_lr must be positive");
  parsed_activation(encoder_activation);
  parsed_activation(policy_activation);
  parsed_activation(value_activation);
  for (int w : encoder_hidden) {
    if (w <= 0) throw ConfigError("objective.encoder_hidden widths must be positive");
  }
  for (int w : policy_hidden) {
    if (w <= 0) throw ConfigError("ppo.policy_hidden widths must be positive");
  }
  for (int w : value_hidden) {
    if (w <= 0) throw ConfigError("ppo.value_hidden widths must be positive");
  }

  if (clip_ratio <= 0) throw ConfigError("ppo.clip_ratio must be positive");
  if (value_clip_ratio <= 0) throw ConfigError("ppo.value_clip_ratio must be positive");
  if (gamma <= 0 || gamma > 1) throw ConfigError("ppo.gamma must be in (0, 1]");
  if (gae_lambda < 0 || gae_lambda > 1) throw ConfigError("ppo.gae_lambda must be in [0, 1]");
  if (epochs < 1) throw ConfigError("ppo.epochs must be >= 1");
  if (minibatches < 1) throw ConfigError("ppo.minibatches must be >= 1");
  if (kl_target <= 0) throw ConfigError("ppo.kl_target must be positive");
  if (lr_init <= 0 || lr_min <= 0 || lr_max <= 0) {
    throw ConfigError("ppo learning rates must be positive");
  }
  if (lr_min > lr_max || lr_init < lr_min || lr_init > lr_max) {
    throw ConfigError("ppo.lr_init must lie within [ppo.lr_min, ppo.lr_max]");
  }
  if (log_std_min > log_std_max) {
    throw ConfigError("ppo.log_std_min must not exceed ppo.log_std_max");
  }
  if (init_log_std < log_std_min || init_log_std > log_std_max) {
    throw ConfigError("ppo.init_log_std must lie within [ppo.log_std_min, ppo.log_std_max]");
  }

  if (eval_trajectories < 0) throw ConfigError("eval.trajectories must be >= 0");
  if (hist_bins < 1) throw ConfigError("eval.hist_bins must be >= 1");
  if (hist_max <= hist_min) throw ConfigError("eval.hist_max must exceed eval.hist_min");
  if (coverage_cell <= 0) throw ConfigError("eval.coverage_cell must be positive");

  if (track_gain <= 0) throw ConfigError("track.gain must be positive");
  if (track_tolerance <= 0) throw ConfigError("track.tolerance must be positive");
  if (track_heading_tolerance <= 0) {
    throw ConfigError("track.heading_tolerance must be positive");
  }
  if (track_hold_steps < 1) throw ConfigError("track.hold_steps must be >= 1");
  if (track_max_steps < 1) throw ConfigError("track.max_steps must be >= 1");
  if (track_desired_velocity != "copy" && track_desired_velocity != "zero") {
    throw ConfigError("track.desired_velocity must be 'copy' or 'zero'");
  }
}

}  // namespace skillab
