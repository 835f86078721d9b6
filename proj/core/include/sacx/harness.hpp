#pragma once

#include "sacx/config.hpp"
#include "sacx/metrics.hpp"
#include "sacx/sac.hpp"

#include <functional>
#include <string>
#include <vector>

namespace sacx::harness {

enum class ActionMode { Sample, Mode };
ActionMode action_mode_from_string(const std::string& s);

struct EpisodeStats {
  double ret = 0.0;
  int length = 0;
  bool terminal = false;
  int steps_at_goal = 0;  // chain: post-step positions at the last node
};

struct EvalResult {
  double mean_return = 0.0;
  double success_rate = 0.0;
  double mean_length = 0.0;
  double mean_steps_at_goal = 0.0;
  std::vector<EpisodeStats> episodes;
};

// Steps an always-right policy spends at the last node within the limit.
inline int optimal_steps_at_goal(const env::ChainConfig& c) { return c.time_limit - c.length + 2; }

struct EvalOptions {
  int episodes = 20;
  ActionMode action_mode = ActionMode::Sample;
  bool track_goal_steps = false;  // count steps whose obs sits at the chain's last node
  int success_goal_steps = -1;    // >= 0: success when steps_at_goal >= this (infinite chain)
};

// Rolls out evaluation episodes with rng isolated from training; neither the
// replay buffer nor any agent state is touched.
EvalResult eval_policy(const sac::Agent& agent, env::Env& env, const EvalOptions& opts, Rng& rng);

// Sampled 500-episode evaluation with the nav obstacle enabled.
double eval_dynamics_robustness(const sac::Agent& agent, const config::ExperimentConfig& cfg,
                                int episodes, uint64_t seed);

struct GapResult {
  double gap = 0.0;             // mean task return minus mean adversarial return
  double gap_recomputed = 0.0;  // alpha * mean per-episode sum of log pi, re-derived
                                // from the logged (obs, pre_squash) pairs
  double mean_task_return = 0.0;
  double mean_adversarial_return = 0.0;
};

// Gap between task-reward and adversarial-reward returns, where the
// adversarial reward is r - alpha * log pi(a|s) along sampled rollouts.
GapResult eval_adversarial_gap(const sac::Agent& agent, env::Env& env, int episodes, double alpha,
                               Rng& rng);

struct RunOutput {
  uint64_t seed = 0;
  std::string metrics_path;
  std::string checkpoint_path;
  std::string gap_path;  // empty unless cfg.track_gap
  std::vector<metrics::MetricsRow> rows;
};

// Full training run for one seed: collect, train once per env step after the
// initial collect, evaluate every eval_interval steps, write the metrics CSV
// (flushed row by row so an aborted run keeps its partial file) and a final
// checkpoint. Deterministic given (cfg, seed).
RunOutput run_experiment(const config::ExperimentConfig& cfg, uint64_t seed,
                         const std::string& out_dir);

// Seeds are independent work units; runs them on up to `jobs` threads.
std::vector<RunOutput> run_seeds(const config::ExperimentConfig& cfg,
                                 const std::vector<uint64_t>& seeds, const std::string& out_dir,
                                 int jobs);

}  // namespace sacx::harness
