#pragma once

#include "sacx/autodiff.hpp"
#include "sacx/rng.hpp"

#include <vector>

namespace sacx::nn {

using ad::Mat;

// Dense MLP with ReLU hidden activations and a linear output layer. Weights
// are stored (in x out); inputs are row-major batches (one row per sample).
struct Mlp {
  std::vector<int> sizes;     // input, hidden..., output
  std::vector<Mat> weights;   // layer l: sizes[l] x sizes[l+1]
  std::vector<Mat> biases;    // layer l: 1 x sizes[l+1]

  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases.
  static Mlp init(const std::vector<int>& sizes, Rng& rng);
  static Mlp zeros(const std::vector<int>& sizes);

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int layer_count() const { return static_cast<int>(weights.size()); }
  long param_count() const;

  // Forward pass without a tape, for acting, targets and evaluation.
  Mat forward_plain(const Mat& input) const;

  // Tape-recorded forward pass. bind() registers the parameters as leaves so
  // their gradients can be collected after backward().
  struct Binding {
    std::vector<ad::Var> weights, biases;
  };
  Binding bind(ad::Tape& tape) const;
  ad::Var forward(ad::Tape& tape, const Binding& binding, ad::Var input) const;

  // Parameter list in a fixed order (w0, b0, w1, b1, ...), matching
  // collect_grads and Adam moment layout.
  std::vector<Mat*> params();
  std::vector<const Mat*> params() const;
};

std::vector<Mat> collect_grads(ad::Tape& tape, const Mlp::Binding& binding);

// Adam with bias correction (update uses m_hat / (sqrt(v_hat) + epsilon)).
struct Adam {
  double lr;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  long step_count = 0;
  std::vector<Mat> m, v;

  Adam(const std::vector<const Mat*>& params, double lr, double beta1 = 0.9,
       double beta2 = 0.999, double epsilon = 1e-7);

  void step(const std::vector<Mat*>& params, const std::vector<Mat>& grads);
};

}  // namespace sacx::nn
