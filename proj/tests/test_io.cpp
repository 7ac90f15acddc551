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

#include <cstdio>
#include <filesystem>

#include <doctest.h>

#include "skillab/checkpoint.hpp"
#include "skillab/config.hpp"
#include "skillab/goal_file.hpp"
#include "skillab/run_io.hpp"
#include "skillab/trainer.hpp"

using namespace skillab;

namespace {

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("skillab_test_" + tag);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.num_envs = 3;
  cfg.episode_steps = 20;
  cfg.epochs = 2;
  cfg.minibatches = 2;
  cfg.encoder_hidden = {6, 6};
  cfg.policy_hidden = {6, 6};
  cfg.value_hidden = {6, 6};
  return cfg;
}

}  // namespace

TEST_CASE("config: parse(serialize()) is the identity") {
  ExperimentConfig cfg = tiny_config();
  cfg.objective_kind = "metra";
  cfg.env_kind = "unicycle";
  cfg.seed = 987654321;
  cfg.sigma = 0.125;
  const std::string text = cfg.serialize();
  const ExperimentConfig parsed = ExperimentConfig::parse(text);
  CHECK(parsed.serialize() == text);
  CHECK(parsed.seed == cfg.seed);
  CHECK(parsed.objective_kind == "metra");
  CHECK(parsed.num_envs == 3);
}

TEST_CASE("config: unknown keys and malformed values name the problem") {
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[env]\nknid = point_mass\n"),
                       doctest::Contains("env.knid"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[ppo]\ngamma = fast\n"),
                       doctest::Contains("ppo.gamma"), ConfigError);
  CHECK_THROWS_WITH_AS(ExperimentConfig::parse("[nope]\nx = 1\n"),
                       doctest::Contains("nope.x"), ConfigError);
  CHECK_THROWS_AS(ExperimentConfig::parse("[env]\nkind point_mass\n"), ConfigError);
}

TEST_CASE("config: comments, blank lines, and overrides") {
  const std::string text =
      "# top comment\n"
      "[env]\n"
      "kind = unicycle  # inline comment\n"
      "\n"
      "num_envs = 7\n";
  ExperimentConfig cfg = ExperimentConfig::parse(text);
  CHECK(cfg.env_kind == "unicycle");
  CHECK(cfg.num_envs == 7);
  cfg.apply_override("ppo.epochs=3");
  CHECK(cfg.epochs == 3);
  CHECK_THROWS_AS(cfg.apply_override("ppo.epoch=3"), ConfigError);
  CHECK_THROWS_AS(cfg.apply_override("no_equals"), ConfigError);
}

TEST_CASE("config: cross-field validation names the key") {
  ExperimentConfig cfg = tiny_config();
  cfg.objective_kind = "nonsense";
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg.objective_kind = "ours";
  cfg.gamma = 1.5;
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("ppo.gamma"), ConfigError);
  cfg.gamma = 0.99;
  cfg.skill_dim = 4;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("rng: serialized engine state reproduces the stream") {
  Rng a(123);
  for (int i = 0; i < 100; ++i) a.uniform();
  const std::string saved = a.serialize();
  Rng b;
  b.deserialize(saved);
  for (int i = 0; i < 100; ++i) CHECK(a.raw() == b.raw());
}

TEST_CASE("checkpoint: save -> load -> save is byte-identical") {
  const auto dir = temp_dir("ckpt");
  ExperimentConfig cfg = tiny_config();
  Trainer<double> trainer(cfg);
  trainer.update();

  const std::string path_a = (dir / "a.skcp").string();
  const std::string path_b = (dir / "b.skcp").string();
  trainer.make_checkpoint(cfg.serialize()).save(path_a);
  Checkpoint::load(path_a).save(path_b);
  CHECK(read_text_file(path_a) == read_text_file(path_b));
}

TEST_CASE("checkpoint: restore reproduces the exact trainer state") {
  ExperimentConfig cfg = tiny_config();
  Trainer<double> a(cfg);
  a.update();
  a.update();
  const Checkpoint ckpt = a.make_checkpoint(cfg.serialize());

  Trainer<double> b(cfg);
  b.restore(ckpt);
  CHECK(b.state().encoder.flat() == a.state().encoder.flat());
  CHECK(b.state().policy.mean_net.flat() == a.state().policy.mean_net.flat());
  CHECK(b.state().policy.log_std == a.state().policy.log_std);
  CHECK(b.state().value_net.flat() == a.state().value_net.flat());
  CHECK(b.state().dual.lambda == a.state().dual.lambda);
  CHECK(b.state().lr == a.state().lr);
  CHECK(b.state().update_index == a.state().update_index);
  CHECK(b.state().rng == a.state().rng);

  // Continued training stays in lockstep.
  const TrainLogRow ra = a.update();
  const TrainLogRow rb = b.update();
  CHECK(ra.policy_loss == rb.policy_loss);
  CHECK(ra.lambda == rb.lambda);
}

TEST_CASE("checkpoint: dimension mismatches name expected vs found shapes") {
  ExperimentConfig cfg = tiny_config();
  Trainer<double> a(cfg);
  const Checkpoint ckpt = a.make_checkpoint(cfg.serialize());

  ExperimentConfig wider = cfg;
  wider.policy_hidden = {8, 8};
  Trainer<double> b(wider);
  CHECK_THROWS_WITH_AS(b.restore(ckpt), doctest::Contains("policy"), DimensionError);

  Trainer<float> c(cfg);
  CHECK_THROWS_WITH_AS(c.restore(ckpt), doctest::Contains("precision"), DimensionError);
}

TEST_CASE("resume: interrupted run reproduces the uninterrupted log rows") {
  ExperimentConfig cfg = tiny_config();

  Trainer<double> straight(cfg);
  std::vector<TrainLogRow> uninterrupted;
  for (int u = 0; u < 4; ++u) uninterrupted.push_back(straight.update());

  Trainer<double> first_half(cfg);
  first_half.update();
  first_half.update();
  const Checkpoint ckpt = first_half.make_checkpoint(cfg.serialize());

  Trainer<double> resumed(cfg);
  resumed.restore(ckpt);
  for (int u = 2; u < 4; ++u) {
    const TrainLogRow row = resumed.update();
    CHECK(row.update == uninterrupted[static_cast<std::size_t>(u)].update);
    CHECK(row.policy_loss == uninterrupted[static_cast<std::size_t>(u)].policy_loss);
    CHECK(row.value_loss == uninterrupted[static_cast<std::size_t>(u)].value_loss);
    CHECK(row.approx_kl == uninterrupted[static_cast<std::size_t>(u)].approx_kl);
    CHECK(row.encoder_loss == uninterrupted[static_cast<std::size_t>(u)].encoder_loss);
    CHECK(row.lambda == uninterrupted[static_cast<std::size_t>(u)].lambda);
    CHECK(row.mean_episode_speed ==
          uninterrupted[static_cast<std::size_t>(u)].mean_episode_speed);
  }
}

TEST_CASE("train log: header, append, resume truncation") {
  const auto dir = temp_dir("log");
  const std::string path = (dir / "train_log.tsv").string();
  {
    TrainLogWriter writer(path);
    TrainLogRow row;
    for (int u = 1; u <= 3; ++u) {
      row.update = u;
      row.env_steps = 100 * u;
      row.lr = 1e-3;
      writer.append(row);
    }
  }
  const std::string full = read_text_file(path);
  CHECK(full.find(TrainLogWriter::header()) == 0);
  CHECK(std::count(full.begin(), full.end(), '\n') == 4);  // header + 3 rows

  TrainLogWriter::resume_truncate(path, 1);
  const std::string truncated = read_text_file(path);
  CHECK(std::count(truncated.begin(), truncated.end(), '\n') == 2);
  CHECK(truncated.find("\n1\t") != std::string::npos);
  CHECK(truncated.find("\n3\t") == std::string::npos);
}

TEST_CASE("goal file: rows, comments, optional heading, line-numbered errors") {
  const std::string text =
      "# goals\n"
      "1.0 2.0\n"
      "\n"
      "3.5 -4.0 1.57  # pose goal\n";
  const std::vector<GoalRow> goals = parse_goal_file(text);
  REQUIRE(goals.size() == 2);
  CHECK(goals[0].x == 1.0);
  CHECK_FALSE(goals[0].heading.has_value());
  CHECK(goals[1].heading.value() == doctest::Approx(1.57));

  CHECK(parse_goal_file("").empty());
  CHECK_THROWS_WITH_AS(parse_goal_file("1.0 2.0\n3.0\n"), doctest::Contains("line 2"),
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_goal_file("x y\n"), doctest::Contains("line 1"),
                       ConfigError);
}

TEST_CASE("manifest: JSON round trip with verbatim config snapshot") {
  const auto dir = temp_dir("manifest");
  RunManifest manifest;
  manifest.code_version = "skillab 0.1.0";
  manifest.seed = 42;
  manifest.config_text = "[env]\nkind = point_mass\n# bytes preserved\n";
  manifest.started_at = "2026-08-09T00:00:00Z";
  manifest.ended_at = "2026-08-09T00:05:00Z";
  manifest.updates_completed = 7;
  manifest.env_steps = 50400;
  manifest.checkpoints = {"ckpt_000007.skcp"};
  manifest.training_log = "train_log.tsv";
  const std::string path = (dir / "manifest.json").string();
  write_manifest(path, manifest);
  const RunManifest loaded = read_manifest(path);
  CHECK(loaded.config_text == manifest.config_text);
  CHECK(loaded.seed == 42);
  CHECK(loaded.updates_completed == 7);
  CHECK(loaded.checkpoints == manifest.checkpoints);
}

TEST_CASE("trajectory dump: documented header and row shape") {
  TrajectoryDump layout;
  layout.state_names = {"x", "y", "vx", "vy"};
  layout.skill_names = {"z0", "z1"};
  std::string out;
  write_trajectory_header(&out, layout);
  CHECK(out.find("env\tstep\tx\ty\tvx\tvy\taction_0\taction_1\tz0\tz1") == 0);
  append_trajectory_row(&out, 0, 3, {1, 2, 3, 4}, {0.5, -0.5}, {10, 20}, 0.9, -0.01);
  CHECK(std::count(out.begin(), out.end(), '\n') == 2);
  CHECK(out.find("\t0.90000000000000002\t") != std::string::npos);
}
