#include "sacx/envs.hpp"

#include <cmath>
#include <stdexcept>

namespace sacx::env {

namespace {

void require_action_in_box(const Eigen::VectorXd& a, int dim) {
  if (a.size() != dim) {
    throw std::invalid_argument("env: action dimension mismatch");
  }
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (!(a(i) >= -1.0 && a(i) <= 1.0)) {
      throw std::invalid_argument("env: action out of bounds");
    }
  }
}

policy::BoxBounds unit_box(int dim) {
  policy::BoxBounds b;
  b.low = Eigen::VectorXd::Constant(dim, -1.0);
  b.high = Eigen::VectorXd::Constant(dim, 1.0);
  return b;
}

}  // namespace

ChainEnv::ChainEnv(ChainConfig cfg) : cfg_(cfg) {
  if (cfg_.length < 2) {
    throw std::invalid_argument("chain: length must be >= 2");
  }
  if (!(cfg_.right_threshold > -1.0 && cfg_.right_threshold < 1.0)) {
    throw std::invalid_argument("chain: right_threshold must lie in (-1, 1)");
  }
}

Eigen::VectorXd ChainEnv::obs() const {
  Eigen::VectorXd o(1);
  o(0) = static_cast<double>(position_) / static_cast<double>(cfg_.length - 1);
  return o;
}

Eigen::VectorXd ChainEnv::reset(uint64_t /*seed*/) {
  position_ = 0;  // always the leftmost node
  done_ = false;
  return obs();
}

StepResult ChainEnv::step(const Eigen::VectorXd& action) {
  if (done_) {
    throw std::logic_error("chain: episode already finished");
  }
  require_action_in_box(action, 1);
  const bool right = action(0) >= cfg_.right_threshold;
  int next = right ? position_ + 1 : position_ - 1;
  if (next < 0) next = 0;
  if (next > cfg_.length - 1) next = cfg_.length - 1;
  position_ = next;

  StepResult r;
  r.reward = (next == cfg_.length - 1) ? cfg_.goal_reward : cfg_.step_penalty;
  const bool terminal = cfg_.episodic && next == cfg_.length - 1;
  r.termination = terminal ? Termination::Terminal : Termination::Continue;
  done_ = terminal;
  r.next_obs = obs();
  return r;
}

policy::BoxBounds ChainEnv::action_bounds() const { return unit_box(1); }

std::unique_ptr<Env> ChainEnv::clone() const { return std::make_unique<ChainEnv>(cfg_); }

NavEnv::NavEnv(NavConfig cfg) : cfg_(cfg), position_(cfg.start) {
  auto inside_arena = [&](const Eigen::Vector2d& p) {
    return p.x() >= 0 && p.x() <= cfg_.arena && p.y() >= 0 && p.y() <= cfg_.arena;
  };
  if (!inside_arena(cfg_.start) || !inside_arena(cfg_.goal)) {
    throw std::invalid_argument("nav: start and goal must lie inside the arena");
  }
  for (const Rect& r : cfg_.obstacle) {
    if (r.contains(cfg_.start.x(), cfg_.start.y()) || r.contains(cfg_.goal.x(), cfg_.goal.y())) {
      throw std::invalid_argument("nav: obstacle overlaps start or goal");
    }
  }
}

double NavEnv::distance_to_goal() const { return (position_ - cfg_.goal).norm(); }

bool NavEnv::in_obstacle(double x, double y) const {
  if (!cfg_.obstacle_enabled) return false;
  for (const Rect& r : cfg_.obstacle) {
    if (r.contains(x, y)) return true;
  }
  return false;
}

Eigen::VectorXd NavEnv::reset(uint64_t /*seed*/) {
  position_ = cfg_.start;
  done_ = false;
  return position_;
}

StepResult NavEnv::step(const Eigen::VectorXd& action) {
  if (done_) {
    throw std::logic_error("nav: episode already finished");
  }
  require_action_in_box(action, 2);

  const double d_before = distance_to_goal();

  // Axis-by-axis move with sliding: a component that would enter an obstacle
  // is cancelled, the other is kept.
  auto clip = [&](double v) { return std::min(std::max(v, 0.0), cfg_.arena); };
  double nx = clip(position_.x() + action(0));
  if (in_obstacle(nx, position_.y())) nx = position_.x();
  double ny = clip(position_.y() + action(1));
  if (in_obstacle(nx, ny)) ny = position_.y();
  position_ = Eigen::Vector2d(nx, ny);

  const double d_after = distance_to_goal();

  StepResult r;
  r.reward = d_before - d_after;
  for (const Rect& reg : cfg_.penalty_regions) {
    if (reg.contains(nx, ny)) {
      r.reward -= 1.0;
      break;
    }
  }
  const bool terminal = d_after <= cfg_.goal_radius;
  r.termination = terminal ? Termination::Terminal : Termination::Continue;
  done_ = terminal;
  r.next_obs = position_;
  return r;
}

policy::BoxBounds NavEnv::action_bounds() const { return unit_box(2); }

std::unique_ptr<Env> NavEnv::clone() const { return std::make_unique<NavEnv>(cfg_); }

TimeLimit::TimeLimit(std::unique_ptr<Env> inner, int limit) : inner_(std::move(inner)), limit_(limit) {
  if (limit_ < 1) {
    throw std::invalid_argument("time_limit: limit must be >= 1");
  }
}

Eigen::VectorXd TimeLimit::reset(uint64_t seed) {
  steps_ = 0;
  done_ = false;
  return inner_->reset(seed);
}

StepResult TimeLimit::step(const Eigen::VectorXd& action) {
  if (done_) {
    throw std::logic_error("time_limit: episode already finished");
  }
  StepResult r = inner_->step(action);
  ++steps_;
  if (r.termination == Termination::Continue && steps_ >= limit_) {
    r.termination = Termination::Timeout;  // Terminal takes precedence
  }
  done_ = r.termination != Termination::Continue;
  return r;
}

std::unique_ptr<Env> TimeLimit::clone() const {
  return std::make_unique<TimeLimit>(inner_->clone(), limit_);
}

}  // namespace sacx::env
