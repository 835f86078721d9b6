#include "sacx/sac.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace sacx::sac {

namespace {

constexpr double kLogTwo = 0.6931471805599453;
const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

}  // namespace

EntropyRewardMode mode_from_string(const std::string& s) {
  if (s == "full") return EntropyRewardMode::Full;
  if (s == "zeromean") return EntropyRewardMode::ZeroMean;
  if (s == "none") return EntropyRewardMode::None;
  throw std::invalid_argument("sac: unknown entropy reward mode '" + s + "'");
}

std::string to_string(EntropyRewardMode m) {
  switch (m) {
    case EntropyRewardMode::Full: return "full";
    case EntropyRewardMode::ZeroMean: return "zeromean";
    case EntropyRewardMode::None: return "none";
  }
  return "?";
}

double entropy_reward(EntropyRewardMode mode, double alpha, double entropy_estimate,
                      const EntropyRewardMean& mean_state) {
  switch (mode) {
    case EntropyRewardMode::Full:
      return alpha * entropy_estimate;
    case EntropyRewardMode::ZeroMean:
      return alpha * entropy_estimate - (mean_state.initialized ? mean_state.running_mean : 0.0);
    case EntropyRewardMode::None:
      return 0.0;
  }
  return 0.0;
}

Batch make_batch(const replay::ReplayBuffer& buffer, const std::vector<size_t>& indices) {
  if (indices.empty()) {
    throw std::invalid_argument("sac: empty batch");
  }
  const int n = static_cast<int>(indices.size());
  const auto& first = buffer.at(indices[0]);
  Batch b;
  b.obs.resize(n, first.obs.size());
  b.action.resize(n, first.action.size());
  b.next_obs.resize(n, first.next_obs.size());
  b.reward.resize(n);
  b.bootstrap.resize(n);
  for (int i = 0; i < n; ++i) {
    const replay::Transition& t = buffer.at(indices[i]);
    b.obs.row(i) = t.obs.transpose();
    b.action.row(i) = t.action.transpose();
    b.next_obs.row(i) = t.next_obs.transpose();
    b.reward(i) = t.reward;
    b.bootstrap(i) = bootstrap_of(t.termination);
  }
  return b;
}

Agent::Agent(AgentConfig cfg, uint64_t seed)
    : cfg_(std::move(cfg)),
      actor_(nn::Mlp::zeros({1, 1})),
      q1_(nn::Mlp::zeros({1, 1})),
      q2_(nn::Mlp::zeros({1, 1})),
      q1_target_(nn::Mlp::zeros({1, 1})),
      q2_target_(nn::Mlp::zeros({1, 1})),
      actor_opt_({}, cfg_.lr),
      q1_opt_({}, cfg_.lr),
      q2_opt_({}, cfg_.lr),
      alpha_opt_({}, cfg_.lr),
      rng_(derive_seed(seed, 0xA9E17)) {
  if (cfg_.bounds.low.size() == 0) {
    cfg_.bounds.low = Eigen::VectorXd::Constant(cfg_.action_dim, -1.0);
    cfg_.bounds.high = Eigen::VectorXd::Constant(cfg_.action_dim, 1.0);
  }
  if (!(cfg_.gamma >= 0.0 && cfg_.gamma <= 1.0)) {
    throw std::invalid_argument("sac: gamma must lie in [0, 1]");
  }
  if (!(cfg_.alpha_init > 0.0)) {
    throw std::invalid_argument("sac: alpha must be positive");
  }

  std::vector<int> actor_sizes{cfg_.obs_dim};
  std::vector<int> critic_sizes{cfg_.obs_dim + cfg_.action_dim};
  for (int h : cfg_.hidden) {
    actor_sizes.push_back(h);
    critic_sizes.push_back(h);
  }
  actor_sizes.push_back(2 * cfg_.action_dim);  // mean and log_std heads
  critic_sizes.push_back(1);

  Rng init_rng(derive_seed(seed, 0x1417));
  actor_ = nn::Mlp::init(actor_sizes, init_rng);
  q1_ = nn::Mlp::init(critic_sizes, init_rng);
  q2_ = nn::Mlp::init(critic_sizes, init_rng);
  q1_target_ = q1_;
  q2_target_ = q2_;

  log_alpha_ = Mat::Constant(1, 1, std::log(cfg_.alpha_init));
  ent_mean_.momentum = cfg_.ent_mean_momentum;

  actor_opt_ = nn::Adam(std::vector<const Mat*>(actor_.params().begin(), actor_.params().end()),
                        cfg_.lr);
  q1_opt_ = nn::Adam(std::vector<const Mat*>(q1_.params().begin(), q1_.params().end()), cfg_.lr);
  q2_opt_ = nn::Adam(std::vector<const Mat*>(q2_.params().begin(), q2_.params().end()), cfg_.lr);
  const Mat* la = &log_alpha_;
  alpha_opt_ = nn::Adam({la}, cfg_.lr);
}

double Agent::alpha() const { return std::exp(log_alpha_(0, 0)); }

policy::SquashedGaussian Agent::distribution(const Eigen::VectorXd& obs) const {
  Mat out = actor_.forward_plain(obs.transpose());
  const int d = cfg_.action_dim;
  Eigen::VectorXd mean = out.row(0).head(d).transpose();
  Eigen::VectorXd log_std = out.row(0).tail(d).transpose();
  return policy::make_squashed(std::move(mean), std::move(log_std), cfg_.bounds,
                               cfg_.log_std_min, cfg_.log_std_max);
}

Mat Agent::draw_noise(int rows) {
  Mat noise(rows, cfg_.action_dim);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cfg_.action_dim; ++j) {
      noise(i, j) = rng_.normal();
    }
  }
  return noise;
}

Eigen::VectorXd Agent::td_targets(const Batch& batch, bool update_entropy_mean) {
  const int n = batch.size();
  const int d = cfg_.action_dim;

  Mat head = actor_.forward_plain(batch.next_obs);
  Mat mean = head.leftCols(d);
  Mat log_std = head.rightCols(d).cwiseMax(cfg_.log_std_min).cwiseMin(cfg_.log_std_max);
  Mat noise = draw_noise(n);
  Mat pre_squash = mean + log_std.array().exp().matrix().cwiseProduct(noise);

  // log pi rows; z = noise exactly because pre_squash = mean + std * noise.
  Eigen::VectorXd log_pi(n);
  const double scale_jac = ((cfg_.bounds.high - cfg_.bounds.low).array() / 2.0).log().sum();
  for (int i = 0; i < n; ++i) {
    double lp = 0.0;
    for (int j = 0; j < d; ++j) {
      const double u = pre_squash(i, j);
      lp += -0.5 * noise(i, j) * noise(i, j) - log_std(i, j) - kHalfLogTwoPi;
      lp -= 2.0 * (kLogTwo - u - softplus(-2.0 * u));
    }
    log_pi(i) = lp - scale_jac;
  }

  Mat squashed = pre_squash.array().tanh().min(1.0 - policy::kSquashMargin)
                     .max(-1.0 + policy::kSquashMargin);
  Mat action(n, d);
  for (int j = 0; j < d; ++j) {
    const double half = (cfg_.bounds.high(j) - cfg_.bounds.low(j)) / 2.0;
    const double center = (cfg_.bounds.high(j) + cfg_.bounds.low(j)) / 2.0;
    action.col(j) = squashed.col(j) * half + Eigen::VectorXd::Constant(n, center);
  }

  Mat qin(n, batch.next_obs.cols() + d);
  qin << batch.next_obs, action;
  Eigen::VectorXd q1n = q1_target_.forward_plain(qin).col(0);
  Eigen::VectorXd q2n = q2_target_.forward_plain(qin).col(0);
  Eigen::VectorXd min_q = q1n.cwiseMin(q2n);

  const double a = alpha();
  if (cfg_.mode == EntropyRewardMode::ZeroMean && update_entropy_mean) {
    ent_mean_.update((a * (-log_pi.array())).mean());
  }

  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double h = -log_pi(i);
    const double bonus = entropy_reward(cfg_.mode, a, h, ent_mean_);
    y(i) = td_target_value(batch.reward(i), batch.bootstrap(i), cfg_.gamma, min_q(i), bonus);
  }
  return y;
}

ad::Var Agent::build_critic_loss(ad::Tape& tape, const Batch& batch,
                                 const Eigen::VectorXd& targets, nn::Mlp::Binding* b1,
                                 nn::Mlp::Binding* b2) const {
  Mat qin(batch.size(), batch.obs.cols() + batch.action.cols());
  qin << batch.obs, batch.action;
  ad::Var input = tape.leaf(qin);
  ad::Var y = tape.leaf(targets);

  *b1 = q1_.bind(tape);
  *b2 = q2_.bind(tape);
  ad::Var q1v = q1_.forward(tape, *b1, input);
  ad::Var q2v = q2_.forward(tape, *b2, input);
  ad::Var mse1 = ad::mean(ad::square(ad::sub(q1v, y)));
  ad::Var mse2 = ad::mean(ad::square(ad::sub(q2v, y)));
  return ad::scale(ad::add(mse1, mse2), 0.5);
}

double Agent::critic_update(const Batch& batch) {
  Eigen::VectorXd y = td_targets(batch, cfg_.mode == EntropyRewardMode::ZeroMean);

  ad::Tape tape;
  nn::Mlp::Binding b1, b2;
  ad::Var loss = build_critic_loss(tape, batch, y, &b1, &b2);
  const double loss_value = tape.value(loss)(0, 0);
  tape.backward(loss);  // throws on a non-finite loss

  q1_opt_.step(q1_.params(), nn::collect_grads(tape, b1));
  q2_opt_.step(q2_.params(), nn::collect_grads(tape, b2));
  return loss_value;
}

double Agent::critic_loss_value(const Batch& batch, const Eigen::VectorXd& targets) const {
  ad::Tape tape;
  nn::Mlp::Binding b1, b2;
  ad::Var loss = build_critic_loss(tape, batch, targets, &b1, &b2);
  return tape.value(loss)(0, 0);
}

ad::Var Agent::build_actor_loss(ad::Tape& tape, const Batch& batch, const Mat& noise,
                                nn::Mlp::Binding* actor_binding, Eigen::VectorXd* entropies,
                                double* expected_v) const {
  const int d = cfg_.action_dim;
  ad::Var obs = tape.leaf(batch.obs);

  nn::Mlp::Binding ab = actor_.bind(tape);
  ad::Var head = actor_.forward(tape, ab, obs);
  ad::Var mean = ad::cols(head, 0, d);
  ad::Var log_std = ad::clamp(ad::cols(head, d, d), cfg_.log_std_min, cfg_.log_std_max);
  policy::TapeSample s = policy::sample_rows(tape, mean, log_std, noise, cfg_.bounds);

  nn::Mlp::Binding b1 = q1_.bind(tape);
  nn::Mlp::Binding b2 = q2_.bind(tape);
  ad::Var qin = ad::hcat(obs, s.action);
  ad::Var q1v = q1_.forward(tape, b1, qin);
  ad::Var q2v = q2_.forward(tape, b2, qin);
  ad::Var min_q = ad::minimum(q1v, q2v);

  ad::Var loss = ad::mean(ad::sub(ad::scale(s.log_prob, alpha()), min_q));

  if (actor_binding != nullptr) *actor_binding = ab;
  if (entropies != nullptr) *entropies = -tape.value(s.log_prob).col(0);
  if (expected_v != nullptr) *expected_v = tape.value(min_q).col(0).mean();
  return loss;
}

double Agent::actor_update(const Batch& batch) {
  Mat noise = draw_noise(batch.size());

  ad::Tape tape;
  nn::Mlp::Binding ab;
  ad::Var loss = build_actor_loss(tape, batch, noise, &ab, &last_entropies_, &last_expected_v_);
  const double loss_value = tape.value(loss)(0, 0);
  tape.backward(loss);

  actor_opt_.step(actor_.params(), nn::collect_grads(tape, ab));
  return loss_value;
}

double Agent::actor_loss_value(const Batch& batch, const Mat& noise) const {
  ad::Tape tape;
  ad::Var loss = build_actor_loss(tape, batch, noise, nullptr, nullptr, nullptr);
  return tape.value(loss)(0, 0);
}

void Agent::alpha_update(const Eigen::VectorXd& entropy_estimates) {
  if (!cfg_.alpha_tunable) return;
  // loss = log_alpha * mean(h - target); the gradient is the mean itself.
  const double grad = (entropy_estimates.array() - entropy_target()).mean();
  std::vector<Mat> grads{Mat::Constant(1, 1, grad)};
  std::vector<Mat*> params{&log_alpha_};
  alpha_opt_.step(params, grads);
}

void Agent::soft_update() {
  const double tau = cfg_.tau;
  auto blend = [tau](nn::Mlp& target, const nn::Mlp& online) {
    for (int l = 0; l < target.layer_count(); ++l) {
      target.weights[l] = (1.0 - tau) * target.weights[l] + tau * online.weights[l];
      target.biases[l] = (1.0 - tau) * target.biases[l] + tau * online.biases[l];
    }
  };
  blend(q1_target_, q1_);
  blend(q2_target_, q2_);
}

Agent::IterationStats Agent::train_iteration(const replay::ReplayBuffer& buffer, int batch_size) {
  std::vector<size_t> idx = buffer.sample_indices(static_cast<size_t>(batch_size), rng_);
  Batch batch = make_batch(buffer, idx);

  IterationStats stats;
  stats.critic_loss = critic_update(batch);
  stats.actor_loss = actor_update(batch);
  alpha_update(last_entropies_);
  soft_update();

  stats.alpha = alpha();
  stats.mean_entropy = last_entropies_.mean();
  stats.expected_v = last_expected_v_;
  stats.ent_reward_mean = ent_mean_.initialized ? ent_mean_.running_mean : 0.0;
  return stats;
}

// ---- checkpoint io -------------------------------------------------------

namespace {

void write_mat(std::ostream& os, const std::string& name, const Mat& m) {
  os << "mat " << name << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      os << m(i, j) << (j + 1 < m.cols() ? ' ' : '\n');
    }
  }
}

Mat read_mat(std::istream& is, const std::string& expected_name) {
  std::string tag, name;
  Eigen::Index rows = 0, cols = 0;
  is >> tag >> name >> rows >> cols;
  if (tag != "mat" || name != expected_name) {
    throw std::runtime_error("checkpoint: expected matrix '" + expected_name + "', got '" + name +
                             "'");
  }
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      is >> m(i, j);
    }
  }
  return m;
}

void write_net(std::ostream& os, const std::string& name, const nn::Mlp& net) {
  os << "net " << name << ' ' << net.sizes.size();
  for (int s : net.sizes) os << ' ' << s;
  os << '\n';
  for (int l = 0; l < net.layer_count(); ++l) {
    write_mat(os, name + "_w" + std::to_string(l), net.weights[l]);
    write_mat(os, name + "_b" + std::to_string(l), net.biases[l]);
  }
}

nn::Mlp read_net(std::istream& is, const std::string& expected_name) {
  std::string tag, name;
  size_t n_sizes = 0;
  is >> tag >> name >> n_sizes;
  if (tag != "net" || name != expected_name) {
    throw std::runtime_error("checkpoint: expected net '" + expected_name + "'");
  }
  std::vector<int> sizes(n_sizes);
  for (size_t i = 0; i < n_sizes; ++i) is >> sizes[i];
  nn::Mlp net = nn::Mlp::zeros(sizes);
  for (int l = 0; l < net.layer_count(); ++l) {
    net.weights[l] = read_mat(is, name + "_w" + std::to_string(l));
    net.biases[l] = read_mat(is, name + "_b" + std::to_string(l));
  }
  return net;
}

void write_adam(std::ostream& os, const std::string& name, const nn::Adam& opt) {
  os << "adam " << name << ' ' << opt.lr << ' ' << opt.beta1 << ' ' << opt.beta2 << ' '
     << opt.epsilon << ' ' << opt.step_count << ' ' << opt.m.size() << '\n';
  for (size_t i = 0; i < opt.m.size(); ++i) {
    write_mat(os, name + "_m" + std::to_string(i), opt.m[i]);
    write_mat(os, name + "_v" + std::to_string(i), opt.v[i]);
  }
}

void read_adam(std::istream& is, const std::string& expected_name, nn::Adam& opt) {
  std::string tag, name;
  size_t count = 0;
  is >> tag >> name >> opt.lr >> opt.beta1 >> opt.beta2 >> opt.epsilon >> opt.step_count >> count;
  if (tag != "adam" || name != expected_name) {
    throw std::runtime_error("checkpoint: expected adam state '" + expected_name + "'");
  }
  opt.m.resize(count);
  opt.v.resize(count);
  for (size_t i = 0; i < count; ++i) {
    opt.m[i] = read_mat(is, name + "_m" + std::to_string(i));
    opt.v[i] = read_mat(is, name + "_v" + std::to_string(i));
  }
}

}  // namespace

void Agent::save(std::ostream& os) const {
  os << std::setprecision(17);
  os << "sacx-checkpoint-v1\n";
  os << "mode " << to_string(cfg_.mode) << '\n';
  os << "obs_dim " << cfg_.obs_dim << '\n';
  os << "action_dim " << cfg_.action_dim << '\n';
  os << "bounds_low " << cfg_.bounds.low.transpose() << '\n';
  os << "bounds_high " << cfg_.bounds.high.transpose() << '\n';
  os << "hidden " << cfg_.hidden.size();
  for (int h : cfg_.hidden) os << ' ' << h;
  os << '\n';
  os << "lr " << cfg_.lr << '\n';
  os << "gamma " << cfg_.gamma << '\n';
  os << "tau " << cfg_.tau << '\n';
  os << "alpha_init " << cfg_.alpha_init << '\n';
  os << "alpha_tunable " << (cfg_.alpha_tunable ? 1 : 0) << '\n';
  os << "entropy_target_per_dim " << cfg_.entropy_target_per_dim << '\n';
  os << "ent_mean_momentum " << cfg_.ent_mean_momentum << '\n';
  os << "log_std_min " << cfg_.log_std_min << '\n';
  os << "log_std_max " << cfg_.log_std_max << '\n';
  os << "log_alpha " << log_alpha_(0, 0) << '\n';
  os << "ent_mean " << (ent_mean_.initialized ? 1 : 0) << ' ' << ent_mean_.running_mean << '\n';
  write_net(os, "actor", actor_);
  write_net(os, "q1", q1_);
  write_net(os, "q2", q2_);
  write_net(os, "q1t", q1_target_);
  write_net(os, "q2t", q2_target_);
  write_adam(os, "actor_opt", actor_opt_);
  write_adam(os, "q1_opt", q1_opt_);
  write_adam(os, "q2_opt", q2_opt_);
  write_adam(os, "alpha_opt", alpha_opt_);
  os << "rng ";
  rng_.save(os);
  os << "\nend\n";
}

Agent Agent::load(std::istream& is) {
  std::string header;
  is >> header;
  if (header != "sacx-checkpoint-v1") {
    throw std::runtime_error("checkpoint: unrecognized header '" + header + "'");
  }
  AgentConfig cfg;
  auto expect = [&is](const std::string& key) {
    std::string k;
    is >> k;
    if (k != key) {
      throw std::runtime_error("checkpoint: expected key '" + key + "', got '" + k + "'");
    }
  };
  std::string mode_str;
  expect("mode");
  is >> mode_str;
  cfg.mode = mode_from_string(mode_str);
  expect("obs_dim");
  is >> cfg.obs_dim;
  expect("action_dim");
  is >> cfg.action_dim;
  cfg.bounds.low.resize(cfg.action_dim);
  cfg.bounds.high.resize(cfg.action_dim);
  expect("bounds_low");
  for (int i = 0; i < cfg.action_dim; ++i) is >> cfg.bounds.low(i);
  expect("bounds_high");
  for (int i = 0; i < cfg.action_dim; ++i) is >> cfg.bounds.high(i);
  expect("hidden");
  size_t n_hidden = 0;
  is >> n_hidden;
  cfg.hidden.resize(n_hidden);
  for (size_t i = 0; i < n_hidden; ++i) is >> cfg.hidden[i];
  expect("lr");
  is >> cfg.lr;
  expect("gamma");
  is >> cfg.gamma;
  expect("tau");
  is >> cfg.tau;
  expect("alpha_init");
  is >> cfg.alpha_init;
  expect("alpha_tunable");
  int tunable = 1;
  is >> tunable;
  cfg.alpha_tunable = tunable != 0;
  expect("entropy_target_per_dim");
  is >> cfg.entropy_target_per_dim;
  expect("ent_mean_momentum");
  is >> cfg.ent_mean_momentum;
  expect("log_std_min");
  is >> cfg.log_std_min;
  expect("log_std_max");
  is >> cfg.log_std_max;

  Agent agent(cfg, 0);
  expect("log_alpha");
  double la = 0;
  is >> la;
  agent.log_alpha_(0, 0) = la;
  expect("ent_mean");
  int initialized = 0;
  is >> initialized >> agent.ent_mean_.running_mean;
  agent.ent_mean_.initialized = initialized != 0;
  agent.ent_mean_.momentum = cfg.ent_mean_momentum;
  agent.actor_ = read_net(is, "actor");
  agent.q1_ = read_net(is, "q1");
  agent.q2_ = read_net(is, "q2");
  agent.q1_target_ = read_net(is, "q1t");
  agent.q2_target_ = read_net(is, "q2t");
  read_adam(is, "actor_opt", agent.actor_opt_);
  read_adam(is, "q1_opt", agent.q1_opt_);
  read_adam(is, "q2_opt", agent.q2_opt_);
  read_adam(is, "alpha_opt", agent.alpha_opt_);
  expect("rng");
  agent.rng_.load(is);
  expect("end");
  return agent;
}

void Agent::save_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) {
    throw std::runtime_error("checkpoint: cannot open '" + path + "' for writing");
  }
  save(os);
}

Agent Agent::load_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) {
    throw std::runtime_error("checkpoint: cannot open '" + path + "'");
  }
  return load(is);
}

}  // namespace sacx::sac
