#pragma once

#include "sacx/policy.hpp"

#include <Eigen/Core>

#include <memory>
#include <vector>

namespace sacx::env {

enum class Termination { Continue, Terminal, Timeout };

struct StepResult {
  Eigen::VectorXd next_obs;
  double reward = 0.0;
  Termination termination = Termination::Continue;
};

class Env {
 public:
  virtual ~Env() = default;
  virtual Eigen::VectorXd reset(uint64_t seed) = 0;
  virtual StepResult step(const Eigen::VectorXd& action) = 0;
  virtual int obs_size() const = 0;
  virtual int action_size() const = 0;
  virtual policy::BoxBounds action_bounds() const = 0;
  virtual std::unique_ptr<Env> clone() const = 0;  // fresh, un-reset copy
};

// Chain of `length` nodes. The agent starts at node 0; actions in
// [right_threshold, 1] move right, anything below moves left, clamped at the
// ends. Arriving at a node yields that node's reward: goal_reward at the last
// node, step_penalty elsewhere. In episodic mode the last node is absorbing.
struct ChainConfig {
  int length = 5;
  double step_penalty = -0.05;
  double goal_reward = 0.0;
  bool episodic = true;
  double right_threshold = 0.8;
  int time_limit = 50;
};

class ChainEnv final : public Env {
 public:
  explicit ChainEnv(ChainConfig cfg);
  Eigen::VectorXd reset(uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;
  int obs_size() const override { return 1; }
  int action_size() const override { return 1; }
  policy::BoxBounds action_bounds() const override;
  std::unique_ptr<Env> clone() const override;

  int position() const { return position_; }
  const ChainConfig& config() const { return cfg_; }

 private:
  ChainConfig cfg_;
  int position_ = 0;
  bool done_ = false;
  Eigen::VectorXd obs() const;
};

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

// 2D navigation in a square arena. Reward is the decrease in L2 distance to
// the goal, minus 1 whenever the arrived-at position lies in a penalty
// region. Obstacle rectangles (enabled for evaluation only) cancel the
// movement component that would enter them, so the agent slides along edges.
struct NavConfig {
  double arena = 8.0;
  Eigen::Vector2d start{1.5, 8.0};
  Eigen::Vector2d goal{8.0, 0.0};
  double goal_radius = 0.5;
  std::vector<Rect> penalty_regions{{4.5, 6.5, 6.5, 8.0}, {1.0, 1.0, 3.0, 3.0}};
  std::vector<Rect> obstacle{{4.5, 2.5, 5.5, 5.5}, {5.5, 4.5, 7.5, 5.5}};
  bool obstacle_enabled = false;
  int time_limit = 50;
};

class NavEnv final : public Env {
 public:
  explicit NavEnv(NavConfig cfg);
  Eigen::VectorXd reset(uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;
  int obs_size() const override { return 2; }
  int action_size() const override { return 2; }
  policy::BoxBounds action_bounds() const override;
  std::unique_ptr<Env> clone() const override;

  const Eigen::Vector2d& position() const { return position_; }
  const NavConfig& config() const { return cfg_; }
  double distance_to_goal() const;

 private:
  NavConfig cfg_;
  Eigen::Vector2d position_;
  bool done_ = false;
  bool in_obstacle(double x, double y) const;
};

// Truncates episodes after `limit` steps: a Continue at step index == limit
// becomes Timeout. Terminal results pass through untouched, so downstream TD
// code can bootstrap Timeout transitions with discount gamma and mask
// Terminal ones with 0.
class TimeLimit final : public Env {
 public:
  TimeLimit(std::unique_ptr<Env> inner, int limit);
  Eigen::VectorXd reset(uint64_t seed) override;
  StepResult step(const Eigen::VectorXd& action) override;
  int obs_size() const override { return inner_->obs_size(); }
  int action_size() const override { return inner_->action_size(); }
  policy::BoxBounds action_bounds() const override { return inner_->action_bounds(); }
  std::unique_ptr<Env> clone() const override;

  const Env& inner() const { return *inner_; }
  int steps_taken() const { return steps_; }

 private:
  std::unique_ptr<Env> inner_;
  int limit_;
  int steps_ = 0;
  bool done_ = true;  // must reset before stepping
};

}  // namespace sacx::env
