#include "sacx/harness.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace sacx::harness {

namespace {

constexpr uint64_t kAgentStream = 11;
constexpr uint64_t kExploreStream = 23;
constexpr uint64_t kEnvStream = 37;
constexpr uint64_t kEvalStream = 53;
constexpr uint64_t kGapStream = 71;

Eigen::VectorXd pick_action(const sac::Agent& agent, const Eigen::VectorXd& obs, ActionMode mode,
                            Rng& rng) {
  policy::SquashedGaussian dist = agent.distribution(obs);
  if (mode == ActionMode::Mode) {
    return policy::mode(dist);
  }
  return policy::sample(dist, rng).action;
}

bool obs_at_chain_goal(const Eigen::VectorXd& obs) {
  return obs.size() == 1 && obs(0) == 1.0;
}

}  // namespace

ActionMode action_mode_from_string(const std::string& s) {
  if (s == "sample") return ActionMode::Sample;
  if (s == "mode") return ActionMode::Mode;
  throw std::invalid_argument("harness: unknown action mode '" + s + "'");
}

EvalResult eval_policy(const sac::Agent& agent, env::Env& env, const EvalOptions& opts, Rng& rng) {
  EvalResult res;
  for (int e = 0; e < opts.episodes; ++e) {
    Eigen::VectorXd obs = env.reset(rng.index(UINT64_MAX));
    EpisodeStats ep;
    while (true) {
      Eigen::VectorXd action = pick_action(agent, obs, opts.action_mode, rng);
      env::StepResult sr = env.step(action);
      ep.ret += sr.reward;
      ep.length += 1;
      if (opts.track_goal_steps && obs_at_chain_goal(sr.next_obs)) {
        ep.steps_at_goal += 1;
      }
      obs = sr.next_obs;
      if (sr.termination != env::Termination::Continue) {
        ep.terminal = sr.termination == env::Termination::Terminal;
        break;
      }
    }
    res.mean_return += ep.ret;
    res.mean_length += ep.length;
    res.mean_steps_at_goal += ep.steps_at_goal;
    const bool success = opts.success_goal_steps >= 0 ? ep.steps_at_goal >= opts.success_goal_steps
                                                      : ep.terminal;
    res.success_rate += success ? 1.0 : 0.0;
    res.episodes.push_back(ep);
  }
  const double n = static_cast<double>(opts.episodes);
  res.mean_return /= n;
  res.success_rate /= n;
  res.mean_length /= n;
  res.mean_steps_at_goal /= n;
  return res;
}

double eval_dynamics_robustness(const sac::Agent& agent, const config::ExperimentConfig& cfg,
                                int episodes, uint64_t seed) {
  std::unique_ptr<env::Env> env = cfg.make_env_with_obstacle();
  Rng rng(derive_seed(seed, kEvalStream, 0xB57AC1E));
  EvalOptions opts;
  opts.episodes = episodes;
  opts.action_mode = ActionMode::Sample;
  return eval_policy(agent, *env, opts, rng).mean_return;
}

GapResult eval_adversarial_gap(const sac::Agent& agent, env::Env& env, int episodes, double alpha,
                               Rng& rng) {
  struct LoggedStep {
    Eigen::VectorXd obs, pre_squash;
  };
  std::vector<std::vector<LoggedStep>> trajectories;
  std::vector<double> task_returns, log_pi_sums;

  for (int e = 0; e < episodes; ++e) {
    Eigen::VectorXd obs = env.reset(rng.index(UINT64_MAX));
    double task_ret = 0.0, log_pi_sum = 0.0;
    std::vector<LoggedStep> traj;
    while (true) {
      policy::SquashedGaussian dist = agent.distribution(obs);
      policy::ActionSample s = policy::sample(dist, rng);
      traj.push_back(LoggedStep{obs, s.pre_squash});
      env::StepResult sr = env.step(s.action);
      task_ret += sr.reward;
      log_pi_sum += s.log_prob;
      obs = sr.next_obs;
      if (sr.termination != env::Termination::Continue) break;
    }
    task_returns.push_back(task_ret);
    log_pi_sums.push_back(log_pi_sum);
    trajectories.push_back(std::move(traj));
  }

  GapResult res;
  const double n = static_cast<double>(episodes);
  double gap = 0.0, task_mean = 0.0;
  for (int e = 0; e < episodes; ++e) {
    gap += alpha * log_pi_sums[e];
    task_mean += task_returns[e];
  }
  res.gap = gap / n;
  res.mean_task_return = task_mean / n;
  res.mean_adversarial_return = res.mean_task_return - res.gap;

  // Independent bookkeeping route: negated entropy estimates recomputed from
  // the logged states and pre-squash actions.
  double recomputed = 0.0;
  for (const auto& traj : trajectories) {
    double ep_sum = 0.0;
    for (const LoggedStep& step : traj) {
      policy::SquashedGaussian dist = agent.distribution(step.obs);
      ep_sum += policy::log_prob(dist, step.pre_squash);
    }
    recomputed += alpha * ep_sum;
  }
  res.gap_recomputed = recomputed / n;
  return res;
}

RunOutput run_experiment(const config::ExperimentConfig& cfg, uint64_t seed,
                         const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  RunOutput out;
  out.seed = seed;
  out.metrics_path = out_dir + "/metrics_seed" + std::to_string(seed) + ".csv";
  out.checkpoint_path = out_dir + "/checkpoint_seed" + std::to_string(seed) + ".txt";

  std::unique_ptr<env::Env> env = cfg.make_env();
  sac::Agent agent(cfg.agent_config(), derive_seed(seed, kAgentStream));
  replay::ReplayBuffer buffer(cfg.buffer_capacity);
  Rng explore(derive_seed(seed, kExploreStream));
  Rng env_rng(derive_seed(seed, kEnvStream));
  metrics::CsvWriter csv(out.metrics_path);

  std::ofstream gap_csv;
  if (cfg.track_gap) {
    out.gap_path = out_dir + "/gap_seed" + std::to_string(seed) + ".csv";
    gap_csv.open(out.gap_path);
    gap_csv << "env_steps,gap,gap_recomputed,task_return,adversarial_return\n";
  }

  metrics::RewardNormalizer normalizer(cfg.reward_norm_clip_lo, cfg.reward_norm_clip_hi);

  EvalOptions eval_opts;
  eval_opts.episodes = cfg.eval_episodes;
  eval_opts.action_mode = action_mode_from_string(cfg.eval_action_mode);
  eval_opts.track_goal_steps = cfg.env_kind == "chain";
  eval_opts.success_goal_steps =
      cfg.infinite_chain() ? optimal_steps_at_goal(cfg.chain) - 1 : -1;

  Eigen::VectorXd obs = env->reset(env_rng.index(UINT64_MAX));

  // Per-eval-window means of the training diagnostics.
  double w_expected_v = 0.0, w_entropy = 0.0, w_ent_mean = 0.0;
  long w_count = 0;

  for (long step = 1; step <= cfg.total_steps; ++step) {
    policy::SquashedGaussian dist = agent.distribution(obs);
    policy::ActionSample action = policy::sample(dist, explore);
    env::StepResult sr = env->step(action.action);

    replay::Transition t;
    t.obs = obs;
    t.action = action.action;
    t.reward = cfg.reward_norm ? normalizer.normalize(sr.reward) : sr.reward;
    t.next_obs = sr.next_obs;
    t.termination = sr.termination;
    buffer.push(std::move(t));

    if (sr.termination != env::Termination::Continue) {
      obs = env->reset(env_rng.index(UINT64_MAX));
    } else {
      obs = sr.next_obs;
    }

    if (step > cfg.initial_collect) {
      sac::Agent::IterationStats stats =
          agent.train_iteration(buffer, cfg.batch_size);  // aborts the run on NaN
      w_expected_v += stats.expected_v;
      w_entropy += stats.mean_entropy;
      w_ent_mean += stats.ent_reward_mean;
      ++w_count;
    }

    if (step % cfg.eval_interval == 0) {
      std::unique_ptr<env::Env> eval_env = cfg.make_env();
      Rng eval_rng(derive_seed(seed, kEvalStream, static_cast<uint64_t>(step)));
      EvalResult er = eval_policy(agent, *eval_env, eval_opts, eval_rng);

      metrics::MetricsRow row;
      row.env_steps = step;
      row.seed = seed;
      row.ret = er.mean_return;
      row.success = er.success_rate;
      row.episode_len = er.mean_length;
      row.expected_v = w_count > 0 ? w_expected_v / w_count : 0.0;
      row.entropy = w_count > 0 ? w_entropy / w_count : 0.0;
      row.alpha = agent.alpha();
      row.ent_reward_mean = w_count > 0 ? w_ent_mean / w_count : 0.0;
      csv.write(row);
      out.rows.push_back(row);
      w_expected_v = w_entropy = w_ent_mean = 0.0;
      w_count = 0;
    }

    if (cfg.track_gap && step % cfg.gap_interval == 0) {
      std::unique_ptr<env::Env> gap_env = cfg.make_env();
      Rng gap_rng(derive_seed(seed, kGapStream, static_cast<uint64_t>(step)));
      GapResult g = eval_adversarial_gap(agent, *gap_env, cfg.gap_episodes, agent.alpha(), gap_rng);
      gap_csv.precision(12);
      gap_csv << step << ',' << g.gap << ',' << g.gap_recomputed << ',' << g.mean_task_return
              << ',' << g.mean_adversarial_return << '\n';
      gap_csv.flush();
    }
  }

  agent.save_file(out.checkpoint_path);
  return out;
}

std::vector<RunOutput> run_seeds(const config::ExperimentConfig& cfg,
                                 const std::vector<uint64_t>& seeds, const std::string& out_dir,
                                 int jobs) {
  if (jobs < 1) jobs = 1;
  std::vector<RunOutput> outputs(seeds.size());
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&]() {
    while (true) {
      const size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        outputs[i] = run_experiment(cfg, seeds[i], out_dir);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };

  std::vector<std::thread> threads;
  const int n_threads = std::min<int>(jobs, static_cast<int>(seeds.size()));
  threads.reserve(n_threads);
  for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
  return outputs;
}

}  // namespace sacx::harness
