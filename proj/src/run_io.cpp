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

#include "skillab/run_io.hpp"

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace skillab {

std::string format_full(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

const char* TrainLogWriter::header() {
  return "update\tenv_steps\tlr\tpolicy_loss\tvalue_loss\tentropy\tapprox_kl\t"
         "encoder_loss\tlambda\tviolation_fraction\tmean_dphi_norm\t"
         "mean_episode_speed\treward_intrinsic\treward_extrinsic";
}

TrainLogWriter::TrainLogWriter(std::string path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) {
    std::ofstream out(path_);
    if (!out) throw IoError("cannot create training log '" + path_ + "'");
    out << header() << "\n";
  }
}

void TrainLogWriter::append(const TrainLogRow& row) {
  std::ofstream out(path_, std::ios::app);
  if (!out) throw IoError("cannot append to training log '" + path_ + "'");
  out << row.update << '\t' << row.env_steps << '\t' << format_full(row.lr) << '\t'
      << format_full(row.policy_loss) << '\t' << format_full(row.value_loss) << '\t'
      << format_full(row.entropy) << '\t' << format_full(row.approx_kl) << '\t'
      << format_full(row.encoder_loss) << '\t' << format_full(row.lambda) << '\t'
      << format_full(row.violation_fraction) << '\t'
      << format_full(row.mean_dphi_norm) << '\t'
      << format_full(row.mean_episode_speed) << '\t'
      << format_full(row.reward_intrinsic) << '\t'
      << format_full(row.reward_extrinsic) << '\n';
}

void TrainLogWriter::resume_truncate(const std::string& path, std::int64_t updates) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training log '" + path + "' for resume");
  std::string line;
  std::string kept;
  std::int64_t rows = 0;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      kept = line + "\n";
      first = false;
      continue;
    }
    if (rows >= updates) break;
    kept += line + "\n";
    ++rows;
  }
  in.close();
  write_text_file(path, kept);
}

void write_trajectory_header(std::string* out, const TrajectoryDump& layout) {
  *out += "env\tstep";
  for (const auto& name : layout.state_names) *out += "\t" + name;
  for (int a = 0; a < layout.action_dim; ++a) *out += "\taction_" + std::to_string(a);
  for (const auto& name : layout.skill_names) *out += "\t" + name;
  *out += "\treward_intrinsic\treward_extrinsic\n";
}

void append_trajectory_row(std::string* out, int env, int step,
                           const std::vector<double>& state,
                           const std::vector<double>& action,
                           const std::vector<double>& skill,
                           double reward_intrinsic, double reward_extrinsic) {
  *out += std::to_string(env) + "\t" + std::to_string(step);
  for (double v : state) *out += "\t" + format_full(v);
  for (double v : action) *out += "\t" + format_full(v);
  for (double v : skill) *out += "\t" + format_full(v);
  *out += "\t" + format_full(reward_intrinsic) + "\t" + format_full(reward_extrinsic) + "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_text_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  write_text_file(tmp, content);
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

void write_manifest(const std::string& path, const RunManifest& manifest) {
  nlohmann::json j;
  j["code_version"] = manifest.code_version;
  j["seed"] = manifest.seed;
  j["config"] = manifest.config_text;
  j["started_at"] = manifest.started_at;
  j["ended_at"] = manifest.ended_at;
  j["updates_completed"] = manifest.updates_completed;
  j["env_steps"] = manifest.env_steps;
  j["deterministic"] = manifest.deterministic;
  j["status"] = manifest.status;
  j["checkpoints"] = manifest.checkpoints;
  j["training_log"] = manifest.training_log;
  j["metrics_report"] = manifest.metrics_report;
  write_text_file_atomic(path, j.dump(2) + "\n");
}

RunManifest read_manifest(const std::string& path) {
  nlohmann::json j = nlohmann::json::parse(read_text_file(path));
  RunManifest m;
  m.code_version = j.value("code_version", "");
  m.seed = j.value("seed", std::uint64_t{0});
  m.config_text = j.value("config", "");
  m.started_at = j.value("started_at", "");
  m.ended_at = j.value("ended_at", "");
  m.updates_completed = j.value("updates_completed", std::int64_t{0});
  m.env_steps = j.value("env_steps", std::int64_t{0});
  m.deterministic = j.value("deterministic", true);
  m.status = j.value("status", "");
  m.checkpoints = j.value("checkpoints", std::vector<std::string>{});
  m.training_log = j.value("training_log", "");
  m.metrics_report = j.value("metrics_report", "");
  return m;
}

std::string iso_timestamp_now() {
  const std::time_t now = std::time(nullptr);
  char buf[32];
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

}  // namespace skillab
