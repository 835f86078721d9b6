#pragma once

#include "sacx/envs.hpp"
#include "sacx/nn.hpp"
#include "sacx/policy.hpp"
#include "sacx/replay.hpp"
#include "sacx/rng.hpp"

#include <Eigen/Core>

#include <iosfwd>
#include <string>
#include <vector>

namespace sacx::sac {

using ad::Mat;

// How the entropy term enters the critic target. The actor keeps its entropy
// cost in every mode; this switch is the whole difference between the three
// trained variants.
enum class EntropyRewardMode { Full, ZeroMean, None };

EntropyRewardMode mode_from_string(const std::string& s);
std::string to_string(EntropyRewardMode m);

// Exponential moving average of the weighted entropy reward (alpha * h),
// initialized to the first batch mean and refreshed once per critic batch.
struct EntropyRewardMean {
  double running_mean = 0.0;
  double momentum = 0.001;
  bool initialized = false;

  void update(double batch_mean) {
    if (!initialized) {
      running_mean = batch_mean;
      initialized = true;
    } else {
      running_mean = (1.0 - momentum) * running_mean + momentum * batch_mean;
    }
  }
};

// Entropy bonus that enters the critic target for one transition.
double entropy_reward(EntropyRewardMode mode, double alpha, double entropy_estimate,
                      const EntropyRewardMean& mean_state);

inline double bootstrap_of(env::Termination t) {
  return t == env::Termination::Terminal ? 0.0 : 1.0;  // Timeout bootstraps
}

// y = r + bootstrap * gamma * (min_q_next + entropy_bonus)
inline double td_target_value(double reward, double bootstrap, double gamma, double min_q_next,
                              double entropy_bonus) {
  return reward + bootstrap * gamma * (min_q_next + entropy_bonus);
}

struct Batch {
  Mat obs, action, next_obs;   // n x dim
  Eigen::VectorXd reward;      // n
  Eigen::VectorXd bootstrap;   // n; 0 for Terminal, 1 for Continue/Timeout
  int size() const { return static_cast<int>(reward.size()); }
};

Batch make_batch(const replay::ReplayBuffer& buffer, const std::vector<size_t>& indices);

struct AgentConfig {
  int obs_dim = 1;
  int action_dim = 1;
  policy::BoxBounds bounds;
  std::vector<int> hidden = {100};
  double lr = 1e-4;
  double gamma = 0.99;
  double tau = 0.005;
  EntropyRewardMode mode = EntropyRewardMode::Full;
  double alpha_init = 0.2;
  bool alpha_tunable = true;
  double entropy_target_per_dim = -1.0;
  double ent_mean_momentum = 0.001;
  double log_std_min = policy::kDefaultLogStdMin;
  double log_std_max = policy::kDefaultLogStdMax;
};

// Twin-critic soft actor-critic with a pluggable entropy-reward mode. One
// agent owns one training run; update-time randomness comes from the agent's
// internal rng so checkpoint resume is exact.
class Agent {
 public:
  Agent(AgentConfig cfg, uint64_t seed);

  const AgentConfig& config() const { return cfg_; }
  double alpha() const;
  double entropy_target() const { return cfg_.entropy_target_per_dim * cfg_.action_dim; }
  EntropyRewardMode mode() const { return cfg_.mode; }

  // Actor head evaluated on one observation.
  policy::SquashedGaussian distribution(const Eigen::VectorXd& obs) const;

  struct IterationStats {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha = 0.0;
    double mean_entropy = 0.0;   // mean of -log pi over the batch
    double expected_v = 0.0;     // mean min-Q over (s ~ batch, a ~ pi)
    double ent_reward_mean = 0.0;
  };

  // One critic step, one actor step, one temperature step, one soft target
  // update, in that order.
  IterationStats train_iteration(const replay::ReplayBuffer& buffer, int batch_size);

  // Pieces of the iteration, exposed for tests and diagnostics.
  Eigen::VectorXd td_targets(const Batch& batch, bool update_entropy_mean = false);
  double critic_update(const Batch& batch);
  double actor_update(const Batch& batch);
  void alpha_update(const Eigen::VectorXd& entropy_estimates);
  void soft_update();

  // Deterministic loss recomputation for finite-difference checks.
  double critic_loss_value(const Batch& batch, const Eigen::VectorXd& targets) const;
  double actor_loss_value(const Batch& batch, const Mat& noise) const;

  const Eigen::VectorXd& last_entropies() const { return last_entropies_; }
  double last_expected_v() const { return last_expected_v_; }

  nn::Mlp& actor() { return actor_; }
  nn::Mlp& q1() { return q1_; }
  nn::Mlp& q2() { return q2_; }
  nn::Mlp& q1_target() { return q1_target_; }
  nn::Mlp& q2_target() { return q2_target_; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& q1() const { return q1_; }
  const nn::Mlp& q2() const { return q2_; }
  const nn::Mlp& q1_target() const { return q1_target_; }
  const nn::Mlp& q2_target() const { return q2_target_; }
  EntropyRewardMean& entropy_mean_state() { return ent_mean_; }
  const EntropyRewardMean& entropy_mean_state() const { return ent_mean_; }
  double log_alpha() const { return log_alpha_(0, 0); }
  Rng& rng() { return rng_; }

  void save(std::ostream& os) const;
  static Agent load(std::istream& is);
  void save_file(const std::string& path) const;
  static Agent load_file(const std::string& path);

 private:
  AgentConfig cfg_;
  nn::Mlp actor_, q1_, q2_, q1_target_, q2_target_;
  nn::Adam actor_opt_, q1_opt_, q2_opt_, alpha_opt_;
  Mat log_alpha_;  // 1x1
  EntropyRewardMean ent_mean_;
  Rng rng_;
  Eigen::VectorXd last_entropies_;
  double last_expected_v_ = 0.0;

  Mat draw_noise(int rows);
  // Splits the actor head output into (mean, clamped log_std).
  ad::Var build_actor_loss(ad::Tape& tape, const Batch& batch, const Mat& noise,
                           nn::Mlp::Binding* actor_binding, Eigen::VectorXd* entropies,
                           double* expected_v) const;
  ad::Var build_critic_loss(ad::Tape& tape, const Batch& batch, const Eigen::VectorXd& targets,
                            nn::Mlp::Binding* b1, nn::Mlp::Binding* b2) const;
};

}  // namespace sacx::sac
