#pragma once

#include "sacx/envs.hpp"
#include "sacx/rng.hpp"

#include <Eigen/Core>

#include <vector>

namespace sacx::replay {

struct Transition {
  Eigen::VectorXd obs;
  Eigen::VectorXd action;
  double reward = 0.0;
  Eigen::VectorXd next_obs;
  env::Termination termination = env::Termination::Continue;
};

// Fixed-capacity FIFO ring with uniform with-replacement sampling.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(Transition t);
  size_t size() const { return size_; }
  size_t capacity() const { return capacity_; }
  const Transition& at(size_t i) const { return ring_[i]; }

  // Uniform indices into [0, size); deterministic given the rng state.
  std::vector<size_t> sample_indices(size_t batch_size, Rng& rng) const;

 private:
  size_t capacity_;
  std::vector<Transition> ring_;
  size_t next_ = 0;
  size_t size_ = 0;
};

}  // namespace sacx::replay
