#pragma once

#include "sacx/autodiff.hpp"
#include "sacx/rng.hpp"

#include <Eigen/Core>

namespace sacx::policy {

// Squashed samples are kept strictly inside the box by clipping tanh at
// 1 - kSquashMargin (tanh rounds to exactly 1.0 in double beyond ~19).
inline constexpr double kSquashMargin = 1e-9;
inline constexpr double kDefaultLogStdMin = -10.0;
inline constexpr double kDefaultLogStdMax = 2.0;

struct BoxBounds {
  Eigen::VectorXd low, high;  // low < high elementwise
};

// Diagonal Gaussian squashed through tanh and rescaled into the box.
struct SquashedGaussian {
  Eigen::VectorXd mean;      // pre-squash
  Eigen::VectorXd log_std;   // already clamped
  BoxBounds bounds;
};

SquashedGaussian make_squashed(Eigen::VectorXd mean, Eigen::VectorXd log_std, BoxBounds bounds,
                               double log_std_min = kDefaultLogStdMin,
                               double log_std_max = kDefaultLogStdMax);

struct ActionSample {
  Eigen::VectorXd pre_squash;
  Eigen::VectorXd action;  // strictly inside bounds
  double log_prob;         // nats
};

// log pi(a|s) for the action that squashes from pre_squash. The tanh
// correction uses log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u)), which
// stays finite for any u.
double log_prob(const SquashedGaussian& dist, const Eigen::VectorXd& pre_squash);

ActionSample sample(const SquashedGaussian& dist, const Eigen::VectorXd& noise);
ActionSample sample(const SquashedGaussian& dist, Rng& rng);

// Single-sample estimator of the differential entropy: -log pi of the sample.
double entropy_estimate(const SquashedGaussian& dist, const ActionSample& s);

Eigen::VectorXd mode(const SquashedGaussian& dist);

// ---- batch graph path (one row per state) used inside the learner ----

struct TapeSample {
  ad::Var pre_squash;  // n x d
  ad::Var action;      // n x d, inside bounds
  ad::Var log_prob;    // n x 1
};

ad::Var log_prob_rows(ad::Tape& tape, ad::Var mean, ad::Var log_std, ad::Var pre_squash,
                      const BoxBounds& bounds);

// Reparameterized sample: pre_squash = mean + exp(log_std) * noise. noise is
// entered as a constant leaf so gradients flow into mean and log_std only.
TapeSample sample_rows(ad::Tape& tape, ad::Var mean, ad::Var log_std, const ad::Mat& noise,
                       const BoxBounds& bounds);

}  // namespace sacx::policy
