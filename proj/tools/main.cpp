#include "sacx/config.hpp"
#include "sacx/harness.hpp"
#include "sacx/metrics.hpp"
#include "sacx/oracle.hpp"
#include "sacx/sac.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

// Minimal glob: '*' matches any run, '?' matches one character.
bool glob_match(const std::string& pattern, const std::string& text, size_t p = 0, size_t t = 0) {
  while (p < pattern.size()) {
    if (pattern[p] == '*') {
      for (size_t k = t; k <= text.size(); ++k) {
        if (glob_match(pattern, text, p + 1, k)) return true;
      }
      return false;
    }
    if (t >= text.size()) return false;
    if (pattern[p] != '?' && pattern[p] != text[t]) return false;
    ++p;
    ++t;
  }
  return t == text.size();
}

std::vector<std::string> expand_glob(const std::string& pattern) {
  fs::path p(pattern);
  fs::path dir = p.parent_path();
  if (dir.empty()) dir = ".";
  const std::string name_pattern = p.filename().string();
  std::vector<std::string> matches;
  if (!fs::is_directory(dir)) return matches;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (glob_match(name_pattern, entry.path().filename().string())) {
      matches.push_back(entry.path().string());
    }
  }
  std::sort(matches.begin(), matches.end());
  return matches;
}

int cmd_train(const std::string& config_path, long long seed, const std::string& mode_override,
              const std::string& out_dir, int jobs, const std::vector<std::string>& overrides) {
  sacx::config::ExperimentConfig cfg = sacx::config::ExperimentConfig::from_file(config_path);
  for (const std::string& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("--set expects key=value, got '" + kv + "'");
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!mode_override.empty()) {
    cfg.mode = sacx::sac::mode_from_string(mode_override);
  }

  std::vector<uint64_t> seeds;
  if (seed >= 0) {
    seeds.push_back(static_cast<uint64_t>(seed));
  } else {
    seeds = cfg.seeds;
  }

  std::printf("training %zu seed(s) | env=%s mode=%s alpha=%.3g (%s) | out=%s\n", seeds.size(),
              cfg.env_kind.c_str(), sacx::sac::to_string(cfg.mode).c_str(), cfg.alpha_init,
              cfg.alpha_tunable ? "tunable" : "fixed", out_dir.c_str());
  auto outputs = sacx::harness::run_seeds(cfg, seeds, out_dir, jobs);
  for (const auto& out : outputs) {
    const auto& last = out.rows.back();
    std::printf("seed %llu: final return=%.4f success=%.2f -> %s\n",
                static_cast<unsigned long long>(out.seed), last.ret, last.success,
                out.metrics_path.c_str());
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& env_name, int episodes,
             const std::string& action_mode, bool obstacle, long long seed) {
  sacx::sac::Agent agent = sacx::sac::Agent::load_file(checkpoint);

  sacx::config::ExperimentConfig cfg;
  if (env_name == "chain") {
    cfg.env_kind = "chain";
    cfg.chain.episodic = true;
  } else if (env_name == "chain-infinite") {
    cfg.env_kind = "chain";
    cfg.chain.episodic = false;
  } else if (env_name == "nav") {
    cfg.env_kind = "nav";
    cfg.nav.obstacle_enabled = obstacle;
  } else {
    throw std::invalid_argument("unknown env '" + env_name + "'");
  }

  std::unique_ptr<sacx::env::Env> env = cfg.make_env();
  sacx::harness::EvalOptions opts;
  opts.episodes = episodes;
  opts.action_mode = sacx::harness::action_mode_from_string(action_mode);
  opts.track_goal_steps = cfg.env_kind == "chain";
  opts.success_goal_steps =
      cfg.infinite_chain() ? sacx::harness::optimal_steps_at_goal(cfg.chain) - 1 : -1;

  sacx::Rng rng(sacx::derive_seed(static_cast<uint64_t>(seed), 9001));
  sacx::harness::EvalResult res = sacx::harness::eval_policy(agent, *env, opts, rng);
  std::printf("episodes=%d action_mode=%s\n", episodes, action_mode.c_str());
  std::printf("mean_return=%.6f\nsuccess_rate=%.4f\nmean_episode_len=%.3f\n", res.mean_return,
              res.success_rate, res.mean_length);
  if (cfg.env_kind == "chain") {
    std::printf("mean_steps_at_goal=%.3f\n", res.mean_steps_at_goal);
  }
  return 0;
}

int cmd_aggregate(const std::string& glob, const std::string& out_path, double confidence) {
  std::vector<std::string> files = expand_glob(glob);
  if (files.size() < 2) {
    std::fprintf(stderr, "aggregate: glob '%s' matched %zu file(s); need at least 2\n",
                 glob.c_str(), files.size());
    return 1;
  }
  sacx::metrics::AggregateTable table = sacx::metrics::aggregate_ci(files, confidence);
  sacx::metrics::write_aggregate_csv(table, out_path);
  std::printf("aggregated %zu seed files (%zu eval points) -> %s\n", files.size(),
              table.env_steps.size(), out_path.c_str());
  return 0;
}

void print_dp(const sacx::oracle::DpResult& dp, int length) {
  std::printf("greedy_terminates=%s steps_to_terminal=%d\n", dp.greedy_terminates ? "true" : "false",
              dp.steps_to_terminal);
  std::printf("V[t=0]:");
  for (int s = 0; s < length; ++s) std::printf(" % .6f", dp.value[0][s]);
  std::printf("\npolicy[t=0]:");
  for (int s = 0; s < length; ++s) {
    std::printf(" %c", dp.policy[0][s] == sacx::oracle::ChainAction::Right ? 'R' : 'L');
  }
  std::printf("\n");
}

int cmd_oracle(double alpha, double entropy, double penalty, double gamma, int horizon, int length,
               bool infinite) {
  const bool survive = penalty > 0.0 ? sacx::oracle::inflation_threshold(alpha, entropy, penalty)
                                     : true;
  std::printf("survive_preferred=%s (alpha*entropy=%.6f vs penalty=%.6f)\n",
              survive ? "true" : "false", alpha * entropy, penalty);

  sacx::oracle::ChainMdp mdp;
  mdp.length = length;
  mdp.step_penalty = -penalty;
  mdp.goal_reward = 0.0;
  mdp.gamma = gamma;
  mdp.horizon = horizon;
  mdp.bonus = alpha * gamma * entropy;
  mdp.episodic = !infinite;
  std::printf("bonus=%.6f gamma=%.4f horizon=%d length=%d %s\n", mdp.bonus, gamma, horizon, length,
              infinite ? "infinite-horizon" : "episodic");

  if (infinite) {
    sacx::oracle::ViResult vi = sacx::oracle::infinite_horizon_vi(mdp);
    std::printf("value-iteration converged in %d sweeps\nV:", vi.iterations);
    for (int s = 0; s < length; ++s) std::printf(" % .6f", vi.value[s]);
    std::printf("\npolicy:");
    for (int s = 0; s < length; ++s) {
      std::printf(" %c", vi.policy[s] == sacx::oracle::ChainAction::Right ? 'R' : 'L');
    }
    std::printf("\n");
  } else {
    sacx::oracle::DpResult dp = sacx::oracle::finite_horizon_dp(mdp);
    print_dp(dp, length);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sacx: soft actor-critic entropy-reward ablations on toy control tasks"};
  app.require_subcommand(1);

  auto* train = app.add_subcommand("train", "Train one or more seeds from a config file");
  std::string config_path, out_dir, mode_override;
  long long seed = -1;
  int jobs = 1;
  std::vector<std::string> overrides;
  train->add_option("--config", config_path, "experiment config file")->required();
  train->add_option("--seed", seed, "train a single seed (default: run.seeds from the config)");
  train->add_option("--mode", mode_override, "entropy reward mode override")
      ->check(CLI::IsMember({"full", "zeromean", "none"}));
  train->add_option("--out", out_dir, "output directory")->required();
  train->add_option("--jobs", jobs, "parallel seed workers");
  train->add_option("--set", overrides, "extra key=value config overrides")->take_all();

  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string checkpoint, env_name = "chain", action_mode = "sample";
  int episodes = 20;
  bool obstacle = false;
  long long eval_seed = 0;
  eval->add_option("--checkpoint", checkpoint)->required();
  eval->add_option("--env", env_name)->check(CLI::IsMember({"chain", "chain-infinite", "nav"}));
  eval->add_option("--episodes", episodes);
  eval->add_option("--action-mode", action_mode)->check(CLI::IsMember({"sample", "mode"}));
  eval->add_flag("--obstacle", obstacle, "enable the nav evaluation obstacle");
  eval->add_option("--seed", eval_seed, "evaluation rng seed");

  auto* aggregate = app.add_subcommand("aggregate", "Aggregate per-seed metric CSVs with a t CI");
  std::string glob, agg_out;
  double confidence = 0.95;
  aggregate->add_option("--glob", glob, "e.g. out/metrics_seed*.csv")->required();
  aggregate->add_option("--out", agg_out)->required();
  aggregate->add_option("--confidence", confidence);

  auto* oracle = app.add_subcommand("oracle", "Exact chain solver and inflation verdict");
  double o_alpha = 0.2, o_entropy = std::log(2.0), o_penalty = 0.05, o_gamma = 0.99;
  int o_horizon = 50, o_length = 5;
  bool o_infinite = false;
  oracle->add_option("--alpha", o_alpha, "entropy weight");
  oracle->add_option("--entropy", o_entropy, "assumed policy entropy h");
  oracle->add_option("--penalty", o_penalty, "per-step penalty magnitude");
  oracle->add_option("--gamma", o_gamma);
  oracle->add_option("--horizon", o_horizon);
  oracle->add_option("--length", o_length);
  oracle->add_flag("--infinite", o_infinite, "solve the non-absorbing chain by value iteration");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) {
      return cmd_train(config_path, seed, mode_override, out_dir, jobs, overrides);
    }
    if (eval->parsed()) {
      return cmd_eval(checkpoint, env_name, episodes, action_mode, obstacle, eval_seed);
    }
    if (aggregate->parsed()) {
      return cmd_aggregate(glob, agg_out, confidence);
    }
    if (oracle->parsed()) {
      return cmd_oracle(o_alpha, o_entropy, o_penalty, o_gamma, o_horizon, o_length, o_infinite);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
