#include "sacx/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sacx::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: expected a boolean, got '" + v + "'");
}

std::vector<double> parse_doubles(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    out.push_back(std::stod(trim(item)));
  }
  return out;
}

std::vector<env::Rect> parse_rects(const std::string& v) {
  std::vector<env::Rect> rects;
  std::stringstream ss(v);
  std::string group;
  while (std::getline(ss, group, ';')) {
    group = trim(group);
    if (group.empty()) continue;
    std::vector<double> nums = parse_doubles(group);
    if (nums.size() != 4) {
      throw std::invalid_argument("config: rectangle needs x0,y0,x1,y1");
    }
    rects.push_back(env::Rect{nums[0], nums[1], nums[2], nums[3]});
  }
  return rects;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("config: cannot open '" + path + "'");
  }
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_no) + " is not key=value");
    }
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

void ExperimentConfig::set(const std::string& key, const std::string& value) {
  if (key == "env.kind") {
    if (value != "chain" && value != "nav") {
      throw std::invalid_argument("config: env.kind must be chain or nav");
    }
    env_kind = value;
  } else if (key == "env.chain.length") {
    chain.length = std::stoi(value);
  } else if (key == "env.chain.step_penalty") {
    chain.step_penalty = std::stod(value);
  } else if (key == "env.chain.goal_reward") {
    chain.goal_reward = std::stod(value);
  } else if (key == "env.chain.episodic") {
    chain.episodic = parse_bool(value);
  } else if (key == "env.chain.right_threshold") {
    chain.right_threshold = std::stod(value);
  } else if (key == "env.chain.time_limit") {
    chain.time_limit = std::stoi(value);
  } else if (key == "env.nav.arena") {
    nav.arena = std::stod(value);
  } else if (key == "env.nav.start") {
    auto v = parse_doubles(value);
    if (v.size() != 2) throw std::invalid_argument("config: env.nav.start needs x,y");
    nav.start = Eigen::Vector2d(v[0], v[1]);
  } else if (key == "env.nav.goal") {
    auto v = parse_doubles(value);
    if (v.size() != 2) throw std::invalid_argument("config: env.nav.goal needs x,y");
    nav.goal = Eigen::Vector2d(v[0], v[1]);
  } else if (key == "env.nav.goal_radius") {
    nav.goal_radius = std::stod(value);
  } else if (key == "env.nav.time_limit") {
    nav.time_limit = std::stoi(value);
  } else if (key == "env.nav.obstacle_enabled") {
    nav.obstacle_enabled = parse_bool(value);
  } else if (key == "env.nav.penalty_regions") {
    nav.penalty_regions = parse_rects(value);
  } else if (key == "env.nav.obstacle") {
    nav.obstacle = parse_rects(value);
  } else if (key == "agent.mode") {
    mode = sac::mode_from_string(value);
  } else if (key == "agent.alpha.init") {
    alpha_init = std::stod(value);
  } else if (key == "agent.alpha.tunable") {
    alpha_tunable = parse_bool(value);
  } else if (key == "agent.entropy_target_per_dim") {
    entropy_target_per_dim = std::stod(value);
  } else if (key == "agent.gamma") {
    gamma = std::stod(value);
  } else if (key == "agent.lr") {
    lr = std::stod(value);
  } else if (key == "agent.tau") {
    tau = std::stod(value);
  } else if (key == "agent.hidden") {
    hidden.clear();
    for (double h : parse_doubles(value)) hidden.push_back(static_cast<int>(h));
  } else if (key == "agent.batch_size") {
    batch_size = std::stoi(value);
  } else if (key == "agent.ent_mean_momentum") {
    ent_mean_momentum = std::stod(value);
  } else if (key == "agent.log_std_min") {
    log_std_min = std::stod(value);
  } else if (key == "agent.log_std_max") {
    log_std_max = std::stod(value);
  } else if (key == "train.total_steps") {
    total_steps = std::stol(value);
  } else if (key == "train.initial_collect") {
    initial_collect = std::stol(value);
  } else if (key == "train.buffer_capacity") {
    buffer_capacity = static_cast<size_t>(std::stol(value));
  } else if (key == "train.eval_interval") {
    eval_interval = std::stol(value);
  } else if (key == "train.eval_episodes") {
    eval_episodes = std::stoi(value);
  } else if (key == "train.eval_action_mode") {
    if (value != "sample" && value != "mode") {
      throw std::invalid_argument("config: train.eval_action_mode must be sample or mode");
    }
    eval_action_mode = value;
  } else if (key == "train.reward_norm.enabled") {
    reward_norm = parse_bool(value);
  } else if (key == "train.reward_norm.clip") {
    auto v = parse_doubles(value);
    if (v.size() != 2) throw std::invalid_argument("config: train.reward_norm.clip needs lo,hi");
    reward_norm_clip_lo = v[0];
    reward_norm_clip_hi = v[1];
  } else if (key == "train.track_gap") {
    track_gap = parse_bool(value);
  } else if (key == "train.gap_interval") {
    gap_interval = std::stol(value);
  } else if (key == "train.gap_episodes") {
    gap_episodes = std::stoi(value);
  } else if (key == "run.seeds") {
    seeds.clear();
    for (double s : parse_doubles(value)) seeds.push_back(static_cast<uint64_t>(s));
    if (seeds.empty()) throw std::invalid_argument("config: run.seeds must not be empty");
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

std::unique_ptr<env::Env> ExperimentConfig::make_env() const {
  if (env_kind == "chain") {
    return std::make_unique<env::TimeLimit>(std::make_unique<env::ChainEnv>(chain),
                                            chain.time_limit);
  }
  if (env_kind == "nav") {
    return std::make_unique<env::TimeLimit>(std::make_unique<env::NavEnv>(nav), nav.time_limit);
  }
  throw std::invalid_argument("config: unknown env kind '" + env_kind + "'");
}

std::unique_ptr<env::Env> ExperimentConfig::make_env_with_obstacle() const {
  if (env_kind != "nav") return make_env();
  env::NavConfig with = nav;
  with.obstacle_enabled = true;
  return std::make_unique<env::TimeLimit>(std::make_unique<env::NavEnv>(with), with.time_limit);
}

sac::AgentConfig ExperimentConfig::agent_config() const {
  std::unique_ptr<env::Env> probe = make_env();
  sac::AgentConfig a;
  a.obs_dim = probe->obs_size();
  a.action_dim = probe->action_size();
  a.bounds = probe->action_bounds();
  a.hidden = hidden;
  a.lr = lr;
  a.gamma = gamma;
  a.tau = tau;
  a.mode = mode;
  a.alpha_init = alpha_init;
  a.alpha_tunable = alpha_tunable;
  a.entropy_target_per_dim = entropy_target_per_dim;
  a.ent_mean_momentum = ent_mean_momentum;
  a.log_std_min = log_std_min;
  a.log_std_max = log_std_max;
  return a;
}

}  // namespace sacx::config
