#include "sacx/replay.hpp"

#include <stdexcept>

namespace sacx::replay {

ReplayBuffer::ReplayBuffer(size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) {
    throw std::invalid_argument("replay: capacity must be positive");
  }
  ring_.reserve(capacity_);
}

void ReplayBuffer::push(Transition t) {
  if (!std::isfinite(t.reward)) {
    throw std::invalid_argument("replay: non-finite reward");
  }
  if (size_ < capacity_) {
    ring_.push_back(std::move(t));
    ++size_;
  } else {
    ring_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<size_t> ReplayBuffer::sample_indices(size_t batch_size, Rng& rng) const {
  if (size_ == 0) {
    throw std::logic_error("replay: cannot sample from an empty buffer");
  }
  std::vector<size_t> idx(batch_size);
  for (size_t i = 0; i < batch_size; ++i) {
    idx[i] = static_cast<size_t>(rng.index(size_));
  }
  return idx;
}

}  // namespace sacx::replay
