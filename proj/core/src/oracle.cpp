#include "sacx/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace sacx::oracle {

namespace {

int move(int node, ChainAction a, int length) {
  int next = node + (a == ChainAction::Right ? 1 : -1);
  if (next < 0) next = 0;
  if (next > length - 1) next = length - 1;
  return next;
}

}  // namespace

ChainMdp ChainMdp::from_config(const env::ChainConfig& cfg, double gamma, double bonus) {
  ChainMdp m;
  m.length = cfg.length;
  m.step_penalty = cfg.step_penalty;
  m.goal_reward = cfg.goal_reward;
  m.episodic = cfg.episodic;
  m.horizon = cfg.time_limit;
  m.gamma = gamma;
  m.bonus = bonus;
  return m;
}

DpResult finite_horizon_dp(const ChainMdp& mdp) {
  if (mdp.horizon < 1) {
    throw std::invalid_argument("oracle: horizon must be >= 1");
  }
  const int L = mdp.length;
  const int H = mdp.horizon;

  DpResult res;
  res.value.assign(H + 1, std::vector<double>(L, 0.0));
  res.policy.assign(H, std::vector<ChainAction>(L, ChainAction::Right));

  for (int t = H - 1; t >= 0; --t) {
    for (int s = 0; s < L; ++s) {
      if (mdp.episodic && s == L - 1) {
        res.value[t][s] = 0.0;  // absorbing; nothing accrues past termination
        continue;
      }
      double best = 0.0;
      ChainAction best_a = ChainAction::Right;
      for (ChainAction a : {ChainAction::Right, ChainAction::Left}) {
        const int next = move(s, a, L);
        const double arrival = (next == L - 1) ? mdp.goal_reward : mdp.step_penalty;
        const bool absorbing = mdp.episodic && next == L - 1;
        double q = arrival;
        if (!absorbing) {
          q += mdp.bonus + mdp.gamma * res.value[t + 1][next];
        }
        if (a == ChainAction::Right || q > best) {
          best = q;
          best_a = a;
        }
      }
      res.value[t][s] = best;
      res.policy[t][s] = best_a;
    }
  }

  // Greedy rollout from node 0 at t = 0.
  int node = 0;
  res.greedy_terminates = false;
  res.steps_to_terminal = -1;
  for (int t = 0; t < H; ++t) {
    node = move(node, res.policy[t][node], L);
    if (mdp.episodic && node == L - 1) {
      res.greedy_terminates = true;
      res.steps_to_terminal = t + 1;
      break;
    }
  }
  return res;
}

bool inflation_threshold(double alpha, double entropy, double penalty) {
  if (!(penalty > 0.0)) {
    throw std::invalid_argument("oracle: penalty must be positive");
  }
  return alpha * entropy > penalty;
}

ViResult infinite_horizon_vi(const ChainMdp& mdp, double tolerance) {
  if (!(mdp.gamma < 1.0)) {
    throw std::invalid_argument("oracle: value iteration requires gamma < 1");
  }
  const int L = mdp.length;
  ViResult res;
  res.value.assign(L, 0.0);
  res.policy.assign(L, ChainAction::Right);

  double delta = tolerance + 1.0;
  while (delta > tolerance) {
    delta = 0.0;
    std::vector<double> next_v(L, 0.0);
    for (int s = 0; s < L; ++s) {
      double best = 0.0;
      ChainAction best_a = ChainAction::Right;
      for (ChainAction a : {ChainAction::Right, ChainAction::Left}) {
        const int next = move(s, a, L);
        const double arrival = (next == L - 1) ? mdp.goal_reward : mdp.step_penalty;
        const double q = arrival + mdp.bonus + mdp.gamma * res.value[next];
        if (a == ChainAction::Right || q > best) {
          best = q;
          best_a = a;
        }
      }
      next_v[s] = best;
      res.policy[s] = best_a;
      delta = std::max(delta, std::abs(best - res.value[s]));
    }
    res.value = next_v;
    ++res.iterations;
  }
  return res;
}

}  // namespace sacx::oracle
