#include "sacx/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace sacx::nn {

Mlp Mlp::init(const std::vector<int>& sizes, Rng& rng) {
  Mlp net = zeros(sizes);
  for (int l = 0; l < net.layer_count(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[l]));
    Mat& w = net.weights[l];
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        w(i, j) = rng.uniform(-bound, bound);
      }
    }
  }
  return net;
}

Mlp Mlp::zeros(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("Mlp: need at least input and output sizes");
  }
  Mlp net;
  net.sizes = sizes;
  for (size_t l = 0; l + 1 < sizes.size(); ++l) {
    if (sizes[l] <= 0 || sizes[l + 1] <= 0) {
      throw std::invalid_argument("Mlp: layer sizes must be positive");
    }
    net.weights.push_back(Mat::Zero(sizes[l], sizes[l + 1]));
    net.biases.push_back(Mat::Zero(1, sizes[l + 1]));
  }
  return net;
}

long Mlp::param_count() const {
  long n = 0;
  for (int l = 0; l < layer_count(); ++l) {
    n += weights[l].size() + biases[l].size();
  }
  return n;
}

Mat Mlp::forward_plain(const Mat& input) const {
  if (input.cols() != input_size()) {
    throw std::invalid_argument("Mlp: input width does not match network input size");
  }
  Mat x = input;
  for (int l = 0; l < layer_count(); ++l) {
    Mat h = x * weights[l];
    h.rowwise() += biases[l].row(0);
    if (l + 1 < layer_count()) {
      h = h.cwiseMax(0.0);
    }
    x = std::move(h);
  }
  return x;
}

Mlp::Binding Mlp::bind(ad::Tape& tape) const {
  Binding b;
  for (int l = 0; l < layer_count(); ++l) {
    b.weights.push_back(tape.leaf(weights[l]));
    b.biases.push_back(tape.leaf(biases[l]));
  }
  return b;
}

ad::Var Mlp::forward(ad::Tape& tape, const Binding& binding, ad::Var input) const {
  if (tape.value(input).cols() != input_size()) {
    throw std::invalid_argument("Mlp: input width does not match network input size");
  }
  ad::Var x = input;
  for (int l = 0; l < layer_count(); ++l) {
    x = ad::add_rowvec(ad::matmul(x, binding.weights[l]), binding.biases[l]);
    if (l + 1 < layer_count()) {
      x = ad::relu(x);
    }
  }
  return x;
}

std::vector<Mat*> Mlp::params() {
  std::vector<Mat*> out;
  for (int l = 0; l < layer_count(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<const Mat*> Mlp::params() const {
  std::vector<const Mat*> out;
  for (int l = 0; l < layer_count(); ++l) {
    out.push_back(&weights[l]);
    out.push_back(&biases[l]);
  }
  return out;
}

std::vector<Mat> collect_grads(ad::Tape& tape, const Mlp::Binding& binding) {
  std::vector<Mat> grads;
  for (size_t l = 0; l < binding.weights.size(); ++l) {
    grads.push_back(tape.grad(binding.weights[l]));
    grads.push_back(tape.grad(binding.biases[l]));
  }
  return grads;
}

Adam::Adam(const std::vector<const Mat*>& params, double lr, double beta1, double beta2,
           double epsilon)
    : lr(lr), beta1(beta1), beta2(beta2), epsilon(epsilon) {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw std::invalid_argument("Adam: betas must be in [0, 1)");
  }
  if (!(epsilon > 0.0)) {
    throw std::invalid_argument("Adam: epsilon must be positive");
  }
  for (const Mat* p : params) {
    m.push_back(Mat::Zero(p->rows(), p->cols()));
    v.push_back(Mat::Zero(p->rows(), p->cols()));
  }
}

void Adam::step(const std::vector<Mat*>& params, const std::vector<Mat>& grads) {
  if (params.size() != m.size() || grads.size() != m.size()) {
    throw std::invalid_argument("Adam: parameter/gradient count mismatch");
  }
  ++step_count;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(step_count));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    const Mat& g = grads[i];
    if (!g.allFinite()) {
      throw std::runtime_error("Adam: non-finite gradient");
    }
    m[i] = beta1 * m[i] + (1.0 - beta1) * g;
    v[i] = beta2 * v[i] + (1.0 - beta2) * g.cwiseProduct(g);
    const Mat m_hat = m[i] / bc1;
    const Mat v_hat = v[i] / bc2;
    params[i]->array() -= lr * m_hat.array() / (v_hat.array().sqrt() + epsilon);
  }
}

}  // namespace sacx::nn
