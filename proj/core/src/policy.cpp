#include "sacx/policy.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sacx::policy {

namespace {

constexpr double kLogTwo = 0.6931471805599453;
const double kHalfLogTwoPi = 0.5 * std::log(2.0 * std::numbers::pi);

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

void check_dims(const SquashedGaussian& dist, const Eigen::VectorXd& v, const char* what) {
  if (v.size() != dist.mean.size()) {
    throw std::invalid_argument(std::string("policy: dimension mismatch for ") + what);
  }
}

}  // namespace

SquashedGaussian make_squashed(Eigen::VectorXd mean, Eigen::VectorXd log_std, BoxBounds bounds,
                               double log_std_min, double log_std_max) {
  if (mean.size() != log_std.size() || mean.size() != bounds.low.size() ||
      mean.size() != bounds.high.size()) {
    throw std::invalid_argument("policy: mean/log_std/bounds dimensions disagree");
  }
  if (((bounds.high - bounds.low).array() <= 0.0).any()) {
    throw std::invalid_argument("policy: bounds must satisfy low < high");
  }
  SquashedGaussian d;
  d.mean = std::move(mean);
  d.log_std = log_std.cwiseMax(log_std_min).cwiseMin(log_std_max);
  d.bounds = std::move(bounds);
  return d;
}

double log_prob(const SquashedGaussian& dist, const Eigen::VectorXd& pre_squash) {
  check_dims(dist, pre_squash, "pre_squash");
  double lp = 0.0;
  for (Eigen::Index i = 0; i < pre_squash.size(); ++i) {
    const double u = pre_squash(i);
    const double mu = dist.mean(i);
    const double ls = dist.log_std(i);
    const double z = (u - mu) * std::exp(-ls);
    lp += -0.5 * z * z - ls - kHalfLogTwoPi;
    // minus log(1 - tanh(u)^2), stable form
    lp -= 2.0 * (kLogTwo - u - softplus(-2.0 * u));
    lp -= std::log((dist.bounds.high(i) - dist.bounds.low(i)) / 2.0);
  }
  return lp;
}

ActionSample sample(const SquashedGaussian& dist, const Eigen::VectorXd& noise) {
  check_dims(dist, noise, "noise");
  ActionSample s;
  s.pre_squash = dist.mean + dist.log_std.array().exp().matrix().cwiseProduct(noise);
  Eigen::ArrayXd t = s.pre_squash.array().tanh();
  t = t.min(1.0 - kSquashMargin).max(-1.0 + kSquashMargin);
  s.action = dist.bounds.low.array() +
             (dist.bounds.high - dist.bounds.low).array() * (t + 1.0) / 2.0;
  s.log_prob = log_prob(dist, s.pre_squash);
  return s;
}

ActionSample sample(const SquashedGaussian& dist, Rng& rng) {
  Eigen::VectorXd noise(dist.mean.size());
  for (Eigen::Index i = 0; i < noise.size(); ++i) {
    noise(i) = rng.normal();
  }
  return sample(dist, noise);
}

double entropy_estimate(const SquashedGaussian& dist, const ActionSample& s) {
  (void)dist;
  return -s.log_prob;
}

Eigen::VectorXd mode(const SquashedGaussian& dist) {
  Eigen::ArrayXd t = dist.mean.array().tanh();
  t = t.min(1.0 - kSquashMargin).max(-1.0 + kSquashMargin);
  return dist.bounds.low.array() + (dist.bounds.high - dist.bounds.low).array() * (t + 1.0) / 2.0;
}

ad::Var log_prob_rows(ad::Tape& tape, ad::Var mean, ad::Var log_std, ad::Var pre_squash,
                      const BoxBounds& bounds) {
  (void)tape;
  // Gaussian term, elementwise: -z^2/2 - log_std - log(2 pi)/2
  ad::Var z = ad::mul(ad::sub(pre_squash, mean), ad::exp(ad::neg(log_std)));
  ad::Var gauss = ad::add_scalar(ad::sub(ad::scale(ad::square(z), -0.5), log_std), -kHalfLogTwoPi);
  // minus the tanh Jacobian: -log(1 - tanh(u)^2) = 2u + 2 softplus(-2u) - 2 log 2
  ad::Var corr = ad::add_scalar(
      ad::add(ad::scale(pre_squash, 2.0), ad::scale(ad::softplus(ad::scale(pre_squash, -2.0)), 2.0)),
      -2.0 * kLogTwo);
  ad::Var per_row = ad::row_sum(ad::add(gauss, corr));
  const double scale_jac = ((bounds.high - bounds.low).array() / 2.0).log().sum();
  return ad::add_scalar(per_row, -scale_jac);
}

TapeSample sample_rows(ad::Tape& tape, ad::Var mean, ad::Var log_std, const ad::Mat& noise,
                       const BoxBounds& bounds) {
  const ad::Mat& mu = tape.value(mean);
  if (noise.rows() != mu.rows() || noise.cols() != mu.cols()) {
    throw std::invalid_argument("policy: noise shape does not match distribution batch");
  }
  ad::Var eps = tape.leaf(noise);
  TapeSample s;
  s.pre_squash = ad::add(mean, ad::mul(ad::exp(log_std), eps));
  ad::Var t = ad::clamp(ad::tanh(s.pre_squash), -1.0 + kSquashMargin, 1.0 - kSquashMargin);
  Eigen::RowVectorXd half = ((bounds.high - bounds.low) / 2.0).transpose();
  Eigen::RowVectorXd center = ((bounds.high + bounds.low) / 2.0).transpose();
  s.action = ad::colwise_affine(t, half, center);
  s.log_prob = log_prob_rows(tape, mean, log_std, s.pre_squash, bounds);
  return s;
}

}  // namespace sacx::policy
