#pragma once

#include "sacx/envs.hpp"

#include <vector>

namespace sacx::oracle {

enum class ChainAction { Left, Right };

// Two-action abstraction of the chain task with a constant per-step bonus c
// standing in for the (discounted) entropy reward at a fixed policy entropy:
// c = alpha * gamma * h. The bonus attaches to transitions into non-absorbing
// states only; that asymmetry is what inflates pre-termination rewards.
struct ChainMdp {
  int length = 5;
  double step_penalty = -0.05;
  double goal_reward = 0.0;
  bool episodic = true;
  double gamma = 0.99;
  int horizon = 50;
  double bonus = 0.0;

  static ChainMdp from_config(const env::ChainConfig& cfg, double gamma, double bonus);
};

struct DpResult {
  // value[t][node] for t = 0..horizon (value[horizon] is all zeros);
  // policy[t][node] for t = 0..horizon-1.
  std::vector<std::vector<double>> value;
  std::vector<std::vector<ChainAction>> policy;
  bool greedy_terminates = false;
  int steps_to_terminal = -1;  // -1 when the greedy rollout never terminates
};

// Exact backward induction over the truncated horizon.
DpResult finite_horizon_dp(const ChainMdp& mdp);

// The undiscounted survive-vs-terminate criterion: alpha * h > penalty.
// An approximation to finite_horizon_dp's verdict; the two disagree only in
// the band penalty in [alpha*gamma*h, alpha*h) introduced by discounting.
bool inflation_threshold(double alpha, double entropy, double penalty);

struct ViResult {
  std::vector<double> value;
  std::vector<ChainAction> policy;
  int iterations = 0;
};

// Value iteration on the infinite-horizon (non-absorbing) chain to sup-norm
// tolerance. Requires gamma < 1.
ViResult infinite_horizon_vi(const ChainMdp& mdp, double tolerance = 1e-10);

}  // namespace sacx::oracle
