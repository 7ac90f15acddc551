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

// skillab: constrained skill discovery on planar toy environments.
//
//   skillab train   --config cfg.ini --out run/
//   skillab eval    --checkpoint run/ckpt_001000.skcp --out run/eval/
//   skillab track   --checkpoint ... --goals goals.txt --out run/track/
//   skillab compare run_a/eval run_b/eval
//
// Exit codes: 0 success, 2 configuration error, 3 numeric fault, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "skillab/checkpoint.hpp"
#include "skillab/config.hpp"
#include "skillab/goal_file.hpp"
#include "skillab/metrics.hpp"
#include "skillab/run_io.hpp"
#include "skillab/svg.hpp"
#include "skillab/tracker.hpp"
#include "skillab/trainer.hpp"

namespace skillab {
namespace {

constexpr const char* kVersion = "skillab 0.1.0";

namespace fs = std::filesystem;

struct CommonArgs {
  std::string config_path;
  std::string checkpoint_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  bool deterministic = false;
};

std::string checkpoint_name(std::int64_t update) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "ckpt_%06lld.skcp", static_cast<long long>(update));
  return buf;
}

std::optional<fs::path> latest_checkpoint(const fs::path& dir) {
  std::optional<fs::path> best;
  std::int64_t best_index = -1;
  if (!fs::exists(dir)) return best;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    long long index = -1;
    if (std::sscanf(name.c_str(), "ckpt_%lld.skcp", &index) == 1) {
      if (index > best_index) {
        best_index = index;
        best = entry.path();
      }
    }
  }
  return best;
}

ExperimentConfig resolve_config(const std::string& text, const CommonArgs& args) {
  ExperimentConfig cfg = ExperimentConfig::parse(text);
  for (const std::string& assignment : args.overrides) cfg.apply_override(assignment);
  if (args.seed) cfg.seed = *args.seed;
  cfg.validate();
  return cfg;
}

// ---------------------------------------------------------------------------
// train

template <typename S>
int run_train(const ExperimentConfig& cfg, const std::string& input_text,
              const CommonArgs& args, bool resume) {
  const fs::path out(args.out_dir);
  fs::create_directories(out);

  const fs::path log_path = out / "train_log.tsv";
  const fs::path manifest_path = out / "manifest.json";
  if (!resume && (fs::exists(log_path) || fs::exists(manifest_path) ||
                  latest_checkpoint(out))) {
    throw IoError("output directory '" + args.out_dir +
                  "' already holds a run; pass --resume to continue it");
  }

  Trainer<S> trainer(cfg);
  const std::string resolved = cfg.serialize();
  write_text_file((out / "config.ini").string(), input_text);
  write_text_file((out / "resolved_config.ini").string(), resolved);

  RunManifest manifest;
  manifest.code_version = kVersion;
  manifest.seed = cfg.seed;
  manifest.config_text = input_text;
  manifest.started_at = iso_timestamp_now();
  manifest.deterministic = true;
  manifest.training_log = "train_log.tsv";

  if (resume) {
    const auto ckpt_path = latest_checkpoint(out);
    if (!ckpt_path) {
      throw IoError("--resume: no checkpoint found under '" + args.out_dir + "'");
    }
    trainer.restore(Checkpoint::load(ckpt_path->string()));
    TrainLogWriter::resume_truncate(log_path.string(), trainer.state().update_index);
    std::cout << "resuming from " << ckpt_path->filename().string() << " (update "
              << trainer.state().update_index << ")\n";
  } else {
    trainer.make_checkpoint(resolved).save((out / checkpoint_name(0)).string());
    manifest.checkpoints.push_back(checkpoint_name(0));
  }

  TrainLogWriter log(log_path.string());
  auto save_checkpoint = [&](std::int64_t update) {
    const std::string name = checkpoint_name(update);
    trainer.make_checkpoint(resolved).save((out / name).string());
    if (std::find(manifest.checkpoints.begin(), manifest.checkpoints.end(), name) ==
        manifest.checkpoints.end()) {
      manifest.checkpoints.push_back(name);
    }
    return name;
  };

  int status = 0;
  try {
    while (trainer.state().update_index < cfg.updates) {
      const TrainLogRow row = trainer.update();
      log.append(row);
      if (row.update % cfg.checkpoint_every == 0) {
        save_checkpoint(row.update);
        std::cout << "update " << row.update << "/" << cfg.updates
                  << "  speed " << row.mean_episode_speed << " m/s  kl "
                  << row.approx_kl << "  lambda " << row.lambda << "\n";
      }
    }
    manifest.status = "ok";
  } catch (const NumericFault& fault) {
    std::cerr << "numeric fault: " << fault.what() << "\n";
    manifest.status = std::string("numeric_fault: ") + fault.what();
    status = 3;
  }
  save_checkpoint(trainer.state().update_index);
  manifest.ended_at = iso_timestamp_now();
  manifest.updates_completed = trainer.state().update_index;
  manifest.env_steps = trainer.state().env_steps;
  write_manifest(manifest_path.string(), manifest);
  std::cout << (status == 0 ? "done: " : "aborted: ") << trainer.state().update_index
            << " updates, " << trainer.state().env_steps << " env steps\n";
  return status;
}

// ---------------------------------------------------------------------------
// shared model loading for eval/track

template <typename S>
Trainer<S> load_trainer(const ExperimentConfig& cfg, const Checkpoint& ckpt) {
  Trainer<S> trainer(cfg);
  trainer.restore(ckpt);
  return trainer;
}

ExperimentConfig config_from_checkpoint(const Checkpoint& ckpt, const CommonArgs& args) {
  return resolve_config(ckpt.blob("config"), args);
}

// ---------------------------------------------------------------------------
// eval

std::string bool_text(bool v) { return v ? "true" : "false"; }

void write_report(const fs::path& out, const MetricsReport& report,
                  const ExperimentConfig& cfg, std::uint64_t seed) {
  std::string text;
  text += "status = ok\n";
  text += "seed = " + std::to_string(seed) + "\n";
  text += "objective = " + cfg.objective_kind + "\n";
  text += "env = " + cfg.env_kind + "\n";
  text += "trajectories = " + std::to_string(report.trajectories) + "\n";
  text += "mean_speed = " + format_full(report.mean_speed) + "\n";
  text += "speed_q10 = " + format_full(report.speed_q10) + "\n";
  text += "speed_q90 = " + format_full(report.speed_q90) + "\n";
  text += "speed_idr = " + format_full(report.speed_idr) + "\n";
  text += "mean_net = " + format_full(report.mean_net) + "\n";
  text += "max_net = " + format_full(report.max_net) + "\n";
  text += "mean_path = " + format_full(report.mean_path) + "\n";
  text += "max_path = " + format_full(report.max_path) + "\n";
  text += "spearman_mag_speed = " + format_full(report.spearman_mag_speed) + "\n";
  text += "spearman_degenerate = " + bool_text(report.spearman_degenerate) + "\n";
  text += "mean_alignment_cosine = " + format_full(report.mean_alignment_cosine) + "\n";
  text += "alignment_filtered = " + std::to_string(report.alignment_filtered) + "\n";
  text += "alignment_degenerate = " + bool_text(report.alignment_degenerate) + "\n";
  text += "coverage_cells = " + std::to_string(report.coverage_cells) + "\n";
  text += "coverage_cell_size = " + format_full(report.coverage_cell_size) + "\n";
  text += "violation_fraction = " + format_full(report.violation_fraction) + "\n";
  text += "hist_bins = " + std::to_string(cfg.hist_bins) + "\n";
  text += "hist_min = " + format_full(cfg.hist_min) + "\n";
  text += "hist_max = " + format_full(cfg.hist_max) + "\n";
  write_text_file((out / "report.txt").string(), text);

  std::string hist = "bin_lo\tbin_hi\tcount\tdensity\n";
  for (std::size_t b = 0; b + 1 < report.histogram.edges.size(); ++b) {
    hist += format_full(report.histogram.edges[b]) + "\t" +
            format_full(report.histogram.edges[b + 1]) + "\t" +
            std::to_string(report.histogram.counts[b]) + "\t" +
            format_full(report.histogram.density[b]) + "\n";
  }
  hist += "# underflow = " + std::to_string(report.histogram.underflow) +
          ", overflow = " + std::to_string(report.histogram.overflow) + "\n";
  write_text_file((out / "speed_histogram.tsv").string(), hist);
}

template <typename S>
int run_eval(const ExperimentConfig& cfg, const Checkpoint& ckpt,
             const CommonArgs& args, bool plots, bool dump_trajectories) {
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const std::uint64_t seed = args.seed.value_or(cfg.seed);

  if (cfg.eval_trajectories == 0) {
    write_text_file((out / "report.txt").string(),
                    "status = empty\ntrajectories = 0\n");
    throw ConfigError("eval.trajectories = 0: nothing to evaluate (report flagged)");
  }

  Trainer<S> trainer = load_trainer<S>(cfg, ckpt);
  Rng rng(seed);
  std::vector<VecX<S>> skills;
  skills.reserve(static_cast<std::size_t>(cfg.eval_trajectories));
  for (int i = 0; i < cfg.eval_trajectories; ++i) {
    skills.push_back(sample_skill<S>(cfg.skill_dim, static_cast<S>(cfg.z_max),
                                     cfg.parsed_skill_sampling(), rng));
  }
  const ObjectiveConfig<S> objective = trainer.objective();
  const auto trajectories = collect_eval_trajectories(
      trainer.env_config(), trainer.state().encoder, trainer.state().policy,
      trainer.scales(), skills, cfg.eval_deterministic_actions, rng,
      dump_trajectories, &objective);

  EvalSettings settings;
  settings.hist_bins = cfg.hist_bins;
  settings.hist_min = cfg.hist_min;
  settings.hist_max = cfg.hist_max;
  settings.coverage_cell = cfg.coverage_cell;
  settings.episode_steps = cfg.episode_steps;
  settings.metric = cfg.implied_distance_metric();
  const MetricsReport report = compute_metrics(trajectories, settings);
  write_report(out, report, cfg, seed);

  std::string speeds = "skill_norm\tmean_speed\n";
  for (const auto& trajectory : trajectories) {
    speeds += format_full(static_cast<double>(trajectory.skill.norm())) + "\t" +
              format_full(static_cast<double>(trajectory.mean_speed)) + "\n";
  }
  write_text_file((out / "skill_speeds.tsv").string(), speeds);

  std::vector<MatX<S>> positions;
  for (const auto& trajectory : trajectories) positions.push_back(trajectory.positions);
  const CoverageGrid grid = coverage_grid(positions, cfg.coverage_cell);
  std::string coverage = "cell_x\tcell_y\n";
  for (const auto& [cx, cy] : grid.cells) {
    coverage += std::to_string(cx) + "\t" + std::to_string(cy) + "\n";
  }
  write_text_file((out / "coverage.tsv").string(), coverage);

  if (dump_trajectories) {
    TrajectoryDump layout;
    layout.state_names = cfg.parsed_env_kind() == EnvKind::kPointMass
                             ? std::vector<std::string>{"x", "y", "vx", "vy"}
                             : std::vector<std::string>{"x", "y", "theta", "v", "omega"};
    layout.skill_names.clear();
    for (int d = 0; d < cfg.skill_dim; ++d) {
      layout.skill_names.push_back("z" + std::to_string(d));
    }
    layout.action_dim = 2;
    std::string dump;
    write_trajectory_header(&dump, layout);
    for (std::size_t k = 0; k < trajectories.size(); ++k) {
      const auto& trajectory = trajectories[k];
      std::vector<double> skill;
      for (Index d = 0; d < trajectory.skill.size(); ++d) {
        skill.push_back(static_cast<double>(trajectory.skill[d]));
      }
      for (Index t = 0; t < trajectory.actions.cols(); ++t) {
        std::vector<double> state;
        for (Index d = 0; d < trajectory.states.rows(); ++d) {
          state.push_back(static_cast<double>(trajectory.states(d, t)));
        }
        append_trajectory_row(
            &dump, static_cast<int>(k), static_cast<int>(t), state,
            {static_cast<double>(trajectory.actions(0, t)),
             static_cast<double>(trajectory.actions(1, t))},
            skill, static_cast<double>(trajectory.reward_intrinsic[t]),
            static_cast<double>(trajectory.reward_extrinsic[t]));
      }
    }
    write_text_file((out / "trajectories.tsv").string(), dump);
  }

  if (plots) {
    HistogramSeries series;
    series.name = cfg.objective_kind;
    series.color = cfg.objective_kind == "ours"
                       ? "#2a7d2a"
                       : (cfg.objective_kind == "lsd" ? "#d2691e" : "#1e6bd2");
    series.density = report.histogram.density;
    write_histogram_svg((out / "speed_histogram.svg").string(),
                        report.histogram.edges, {series}, "mean episode speed [m/s]");
    write_coverage_svg((out / "coverage.svg").string(), grid.cells, cfg.coverage_cell);
    std::vector<TrajectoryLine> lines;
    for (const auto& trajectory : trajectories) {
      TrajectoryLine line;
      for (Index t = 0; t < trajectory.positions.cols(); ++t) {
        line.x.push_back(static_cast<double>(trajectory.positions(0, t)));
        line.y.push_back(static_cast<double>(trajectory.positions(1, t)));
      }
      const double angle = std::atan2(static_cast<double>(trajectory.skill[1]),
                                      static_cast<double>(trajectory.skill[0]));
      line.hue = (angle + 3.14159265358979323846) / (2.0 * 3.14159265358979323846);
      lines.push_back(std::move(line));
    }
    write_trajectories_svg((out / "trajectories.svg").string(), lines);
  }

  std::cout << "eval: " << report.trajectories << " trajectories"
            << "  spearman " << report.spearman_mag_speed << "  alignment "
            << report.mean_alignment_cosine << "  violation "
            << report.violation_fraction << "  coverage " << report.coverage_cells
            << " cells\n";
  return 0;
}

// ---------------------------------------------------------------------------
// track

template <typename S>
int run_track(const ExperimentConfig& cfg, const Checkpoint& ckpt,
              const CommonArgs& args, const std::string& goals_path, bool open_loop,
              bool chain) {
  const fs::path out(args.out_dir);
  fs::create_directories(out);
  const std::vector<GoalRow> goals = parse_goal_file(read_text_file(goals_path));

  std::string report =
      "goal\tx\ty\theading\treached\tsteps_to_reach\tfinal_distance\t"
      "final_heading_error\tmean_terminal_speed\tsteps\n";
  if (goals.empty()) {
    write_text_file((out / "tracking_report.tsv").string(), report);
    std::cout << "warning: goal file '" << goals_path << "' holds no goals\n";
    return 0;
  }

  Trainer<S> trainer = load_trainer<S>(cfg, ckpt);
  Rng rng(args.seed.value_or(cfg.seed));

  TrackingOptions<S> options;
  options.closed_loop = !open_loop;
  options.gain = static_cast<S>(cfg.track_gain);
  options.zero_desired_velocity = cfg.track_desired_velocity == "zero";

  TrajectoryDump layout;
  layout.state_names = cfg.parsed_env_kind() == EnvKind::kPointMass
                           ? std::vector<std::string>{"x", "y", "vx", "vy"}
                           : std::vector<std::string>{"x", "y", "theta", "v", "omega"};
  layout.skill_names.clear();
  layout.action_dim = 0;
  std::string dump;
  write_trajectory_header(&dump, layout);

  VecX<S> start;
  int reached_count = 0;
  for (std::size_t g = 0; g < goals.size(); ++g) {
    GoalSpec<S> goal;
    goal.position << static_cast<S>(goals[g].x), static_cast<S>(goals[g].y);
    if (goals[g].heading) goal.heading = static_cast<S>(*goals[g].heading);
    goal.tolerance = static_cast<S>(cfg.track_tolerance);
    goal.heading_tolerance = static_cast<S>(cfg.track_heading_tolerance);
    goal.max_steps = cfg.track_max_steps;
    goal.hold_steps = cfg.track_hold_steps;

    const bool pose_goal = goal.heading.has_value() &&
                           cfg.parsed_env_kind() == EnvKind::kUnicycle &&
                           cfg.skill_dim == 3;
    const VecX<S>* start_ptr = (chain && g > 0) ? &start : nullptr;
    const TrackingResult<S> result =
        pose_goal ? track_heading_goal(trainer.state().policy, trainer.state().encoder,
                                       trainer.env_config(), trainer.scales(),
                                       static_cast<S>(cfg.z_max), goal, options, rng,
                                       start_ptr)
                  : track_goal(trainer.state().policy, trainer.state().encoder,
                               trainer.env_config(), trainer.scales(),
                               static_cast<S>(cfg.z_max), goal, options, rng,
                               start_ptr);
    start = result.trajectory.col(result.trajectory.cols() - 1);
    reached_count += result.reached ? 1 : 0;

    report += std::to_string(g) + "\t" + format_full(goals[g].x) + "\t" +
              format_full(goals[g].y) + "\t" +
              (goals[g].heading ? format_full(*goals[g].heading) : "-") + "\t" +
              (result.reached ? "1" : "0") + "\t" +
              std::to_string(result.steps_to_reach) + "\t" +
              format_full(static_cast<double>(result.final_distance)) + "\t" +
              format_full(static_cast<double>(result.final_heading_error)) + "\t" +
              format_full(static_cast<double>(result.mean_terminal_speed)) + "\t" +
              std::to_string(result.steps) + "\n";

    for (Index t = 0; t < result.trajectory.cols(); ++t) {
      std::vector<double> state;
      for (Index d = 0; d < result.trajectory.rows(); ++d) {
        state.push_back(static_cast<double>(result.trajectory(d, t)));
      }
      append_trajectory_row(&dump, static_cast<int>(g), static_cast<int>(t), state, {},
                            {}, 0.0, 0.0);
    }
  }

  write_text_file((out / "tracking_report.tsv").string(), report);
  write_text_file((out / "tracking_trajectories.tsv").string(), dump);
  std::cout << "track: " << reached_count << "/" << goals.size() << " goals reached ("
            << (options.closed_loop ? "closed" : "open") << " loop)\n";
  return 0;
}

// ---------------------------------------------------------------------------
// compare

std::map<std::string, std::string> parse_report(const fs::path& path) {
  std::map<std::string, std::string> values;
  std::istringstream in(read_text_file(path.string()));
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

int run_compare(const std::vector<std::string>& dirs, const std::string& out_dir) {
  if (dirs.size() < 2) throw ConfigError("compare: need at least two eval directories");
  struct Entry {
    std::string dir;
    std::map<std::string, std::string> report;
  };
  std::vector<Entry> entries;
  for (const std::string& dir : dirs) {
    const fs::path report_path = fs::path(dir) / "report.txt";
    if (!fs::exists(report_path)) {
      throw IoError("compare: no report at '" + report_path.string() + "'");
    }
    entries.push_back({dir, parse_report(report_path)});
  }

  for (std::size_t i = 1; i < entries.size(); ++i) {
    for (const char* key : {"trajectories", "hist_bins", "hist_min", "hist_max"}) {
      if (entries[i].report[key] != entries[0].report[key]) {
        std::cout << "warning: '" << entries[i].dir << "' has " << key << " = "
                  << entries[i].report[key] << " but '" << entries[0].dir << "' has "
                  << entries[0].report[key] << " (metrics not directly comparable)\n";
      }
    }
  }

  const std::vector<const char*> keys = {
      "objective",          "trajectories",          "mean_speed",
      "speed_q10",          "speed_q90",             "speed_idr",
      "mean_net",           "max_net",               "spearman_mag_speed",
      "mean_alignment_cosine", "coverage_cells",     "violation_fraction"};
  std::printf("%-24s", "metric");
  for (const auto& entry : entries) {
    std::printf("  %-16s", fs::path(entry.dir).string().c_str());
  }
  std::printf("\n");
  for (const char* key : keys) {
    std::printf("%-24s", key);
    for (auto& entry : entries) {
      std::printf("  %-16s", entry.report[key].c_str());
    }
    std::printf("\n");
  }
  // Numeric deltas vs. the first run.
  for (const char* key : {"mean_speed", "speed_idr", "spearman_mag_speed",
                          "mean_alignment_cosine", "violation_fraction"}) {
    std::printf("%-24s", (std::string("delta_") + key).c_str());
    std::printf("  %-16s", "0");
    for (std::size_t i = 1; i < entries.size(); ++i) {
      const double base = std::stod(entries[0].report[key]);
      const double val = std::stod(entries[i].report[key]);
      std::printf("  %-16.6g", val - base);
    }
    std::printf("\n");
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    // Merge histograms over the shared edges.
    std::string merged = "bin_lo\tbin_hi";
    std::vector<std::vector<std::string>> columns;
    std::vector<std::string> edges_lo, edges_hi;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      merged += "\tdensity_" + entries[i].report["objective"] + "_" + std::to_string(i);
      std::istringstream in(
          read_text_file((fs::path(entries[i].dir) / "speed_histogram.tsv").string()));
      std::string line;
      std::getline(in, line);  // header
      std::vector<std::string> density;
      while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream row(line);
        std::string lo, hi, count, dens;
        row >> lo >> hi >> count >> dens;
        if (i == 0) {
          edges_lo.push_back(lo);
          edges_hi.push_back(hi);
        }
        density.push_back(dens);
      }
      columns.push_back(std::move(density));
    }
    merged += "\n";
    for (std::size_t b = 0; b < edges_lo.size(); ++b) {
      merged += edges_lo[b] + "\t" + edges_hi[b];
      for (const auto& column : columns) {
        merged += "\t" + (b < column.size() ? column[b] : "0");
      }
      merged += "\n";
    }
    write_text_file((fs::path(out_dir) / "merged_histogram.tsv").string(), merged);

    const std::vector<std::string> palette = {"#2a7d2a", "#d2691e", "#1e6bd2",
                                              "#8a2aa0", "#a05a2a"};
    std::vector<double> edges;
    for (const auto& lo : edges_lo) edges.push_back(std::stod(lo));
    if (!edges_hi.empty()) edges.push_back(std::stod(edges_hi.back()));
    std::vector<HistogramSeries> series;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      HistogramSeries s;
      s.name = entries[i].report["objective"] + " (" + entries[i].dir + ")";
      s.color = palette[i % palette.size()];
      for (const auto& d : columns[i]) s.density.push_back(std::stod(d));
      series.push_back(std::move(s));
    }
    write_histogram_svg((fs::path(out_dir) / "merged_histogram.svg").string(), edges,
                        series, "mean episode speed [m/s]");
  }
  return 0;
}

// ---------------------------------------------------------------------------

int dispatch(int argc, char** argv) {
  CLI::App app{std::string(kVersion) +
               " - constrained skill discovery on planar environments"};
  app.require_subcommand(1);

  CommonArgs args;
  bool resume = false, open_loop = false, chain = false, plots = false,
       dump_trajectories = false;
  std::string goals_path;
  std::vector<std::string> compare_dirs;
  std::string compare_out;

  auto add_common = [&](CLI::App* cmd, bool needs_checkpoint) {
    if (needs_checkpoint) {
      cmd->add_option("--checkpoint", args.checkpoint_path, "checkpoint file")
          ->required();
    }
    cmd->add_option("--override", args.overrides,
                    "config override section.key=value (repeatable)");
    cmd->add_option("--seed", args.seed, "seed override");
    cmd->add_flag("--deterministic", args.deterministic,
                  "record deterministic mode (runs are single-threaded and "
                  "deterministic regardless)");
  };

  CLI::App* train = app.add_subcommand("train", "train a skill-discovery run");
  train->add_option("--config", args.config_path, "experiment config file")->required();
  train->add_option("--out", args.out_dir, "run output directory")->required();
  train->add_flag("--resume", resume, "resume from the latest checkpoint in --out");
  add_common(train, false);

  CLI::App* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  eval->add_option("--out", args.out_dir, "evaluation output directory")->required();
  eval->add_flag("--plots", plots, "write SVG plots");
  eval->add_flag("--dump-trajectories", dump_trajectories, "write trajectories.tsv");
  add_common(eval, true);

  CLI::App* track = app.add_subcommand("track", "zero-shot goal tracking");
  track->add_option("--goals", goals_path, "goal list file (x y [heading] per line)")
      ->required();
  track->add_option("--out", args.out_dir, "tracking output directory")->required();
  track->add_flag("--open-loop", open_loop, "freeze the skill at the first step");
  track->add_flag("--chain", chain, "start each goal from the previous end state");
  add_common(track, true);

  CLI::App* compare = app.add_subcommand("compare", "compare eval outputs");
  compare->add_option("dirs", compare_dirs, "two or more eval output directories")
      ->required();
  compare->add_option("--out", compare_out, "directory for merged histogram data");

  CLI11_PARSE(app, argc, argv);

  if (train->parsed()) {
    const std::string text = read_text_file(args.config_path);
    const ExperimentConfig cfg = resolve_config(text, args);
    return cfg.precision == "double" ? run_train<double>(cfg, text, args, resume)
                                     : run_train<float>(cfg, text, args, resume);
  }
  if (eval->parsed()) {
    const Checkpoint ckpt = Checkpoint::load(args.checkpoint_path);
    const ExperimentConfig cfg = config_from_checkpoint(ckpt, args);
    return cfg.precision == "double"
               ? run_eval<double>(cfg, ckpt, args, plots, dump_trajectories)
               : run_eval<float>(cfg, ckpt, args, plots, dump_trajectories);
  }
  if (track->parsed()) {
    const Checkpoint ckpt = Checkpoint::load(args.checkpoint_path);
    const ExperimentConfig cfg = config_from_checkpoint(ckpt, args);
    return cfg.precision == "double"
               ? run_track<double>(cfg, ckpt, args, goals_path, open_loop, chain)
               : run_track<float>(cfg, ckpt, args, goals_path, open_loop, chain);
  }
  if (compare->parsed()) {
    return run_compare(compare_dirs, compare_out);
  }
  return 0;
}

}  // namespace
}  // namespace skillab

int main(int argc, char** argv) {
  try {
    return skillab::dispatch(argc, argv);
  } catch (const skillab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const skillab::DimensionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const skillab::NumericFault& e) {
    std::cerr << "numeric fault: " << e.what() << "\n";
    return 3;
  } catch (const skillab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
