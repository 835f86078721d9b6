#pragma once

#include "sacx/envs.hpp"
#include "sacx/sac.hpp"

#include <memory>
#include <string>
#include <vector>

namespace sacx::config {

// One experiment = one environment + one agent variant + a training and
// evaluation protocol. Loaded from flat key=value files with dotted keys
// (e.g. env.chain.episodic=true); CLI flags override file keys.
struct ExperimentConfig {
  // environment
  std::string env_kind = "chain";  // chain | nav
  env::ChainConfig chain;
  env::NavConfig nav;

  // agent
  sac::EntropyRewardMode mode = sac::EntropyRewardMode::Full;
  double alpha_init = 0.2;
  bool alpha_tunable = true;
  double entropy_target_per_dim = -1.0;
  double gamma = 0.99;
  double lr = 1e-4;
  double tau = 0.005;
  std::vector<int> hidden = {100};
  int batch_size = 256;
  double ent_mean_momentum = 0.001;
  double log_std_min = policy::kDefaultLogStdMin;
  double log_std_max = policy::kDefaultLogStdMax;

  // training protocol
  long total_steps = 50000;
  long initial_collect = 5000;
  size_t buffer_capacity = 50000;
  long eval_interval = 1000;
  int eval_episodes = 20;
  std::string eval_action_mode = "sample";  // sample | mode
  bool reward_norm = false;
  double reward_norm_clip_lo = -1.0;
  double reward_norm_clip_hi = 1.0;
  bool track_gap = false;
  long gap_interval = 5000;
  int gap_episodes = 20;
  std::vector<uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8};

  static ExperimentConfig from_file(const std::string& path);

  // Applies one dotted key. Throws on unknown keys or malformed values.
  void set(const std::string& key, const std::string& value);

  int time_limit() const { return env_kind == "nav" ? nav.time_limit : chain.time_limit; }
  bool infinite_chain() const { return env_kind == "chain" && !chain.episodic; }

  std::unique_ptr<env::Env> make_env() const;
  // Same environment with the evaluation-only obstacle switched on (nav).
  std::unique_ptr<env::Env> make_env_with_obstacle() const;

  sac::AgentConfig agent_config() const;
};

}  // namespace sacx::config
