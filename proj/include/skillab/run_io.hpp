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

#ifndef SKILLAB_RUN_IO_HPP_
#define SKILLAB_RUN_IO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "skillab/types.hpp"

namespace skillab {

/// One training-log row; written as tab-separated text, one row per update.
struct TrainLogRow {
  std::int64_t update = 0;
  std::int64_t env_steps = 0;
  double lr = 0;
  double policy_loss = 0;
  double value_loss = 0;
  double entropy = 0;
  double approx_kl = 0;
  double encoder_loss = 0;
  double lambda = 0;
  double violation_fraction = 0;
  double mean_dphi_norm = 0;
  double mean_episode_speed = 0;
  double reward_intrinsic = 0;
  double reward_extrinsic = 0;
};

/// Appending writer for the tab-separated training log. The header is
/// written when the file is created; resume_truncate() cuts the file back to
/// a checkpointed update count so a resumed run reproduces an uninterrupted
/// log byte for byte.
class TrainLogWriter {
 public:
  static const char* header();

  explicit TrainLogWriter(std::string path);
  void append(const TrainLogRow& row);
  const std::string& path() const { return path_; }

  /// Rewrites the log keeping the header and the first `updates` rows.
  static void resume_truncate(const std::string& path, std::int64_t updates);

 private:
  std::string path_;
};

std::string format_full(double value);  // shortest round-trip decimal form

/// Writes one row per (env, step) trajectory record.
struct TrajectoryDump {
  std::vector<std::string> state_names;   // per state dimension
  std::vector<std::string> skill_names;   // per skill dimension
  int action_dim = 2;
};

void write_trajectory_header(std::string* out, const TrajectoryDump& layout);
void append_trajectory_row(std::string* out, int env, int step,
                           const std::vector<double>& state,
                           const std::vector<double>& action,
                           const std::vector<double>& skill,
                           double reward_intrinsic, double reward_extrinsic);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Atomic write: temp file in the same directory, then rename.
void write_text_file_atomic(const std::string& path, const std::string& content);

/// Run manifest (JSON): config snapshot, code version, seed, timestamps,
/// checkpoint paths, and result locations. Written atomically at run end.
struct RunManifest {
  std::string code_version;
  std::uint64_t seed = 0;
  std::string config_text;  // byte-identical snapshot of the parsed input
  std::string started_at;
  std::string ended_at;
  std::int64_t updates_completed = 0;
  std::int64_t env_steps = 0;
  bool deterministic = true;
  std::string status = "ok";
  std::vector<std::string> checkpoints;
  std::string training_log;
  std::string metrics_report;
};

void write_manifest(const std::string& path, const RunManifest& manifest);
RunManifest read_manifest(const std::string& path);

std::string iso_timestamp_now();

}  // namespace skillab

#endif  // SKILLAB_RUN_IO_HPP_
