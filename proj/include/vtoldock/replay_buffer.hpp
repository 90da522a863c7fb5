#pragma once

#include <algorithm>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <vector>

#include "vtoldock/rng.hpp"

namespace vtoldock::agents {

// Bounded FIFO of transitions with uniform minibatch sampling.
template <typename T>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity_ == 0) throw std::invalid_argument("replay buffer capacity must be positive");
    items_.reserve(std::min<std::size_t>(capacity_, 1u << 16));
  }

  void push(T item) {
    if (items_.size() < capacity_) {
      items_.push_back(std::move(item));
    } else {
      items_[head_] = std::move(item);
      head_ = (head_ + 1) % capacity_;
    }
  }

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }

  // i-th oldest stored element.
  const T& at(std::size_t i) const { return items_[(head_ + i) % items_.size()]; }

  // `n` distinct elements chosen uniformly at random (Floyd's algorithm).
  std::vector<T> sample(std::size_t n, Rng& rng) const {
    if (n > items_.size()) throw std::invalid_argument("sample larger than buffer");
    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    const std::size_t m = items_.size();
    for (std::size_t j = m - n; j < m; ++j) {
      std::uniform_int_distribution<std::size_t> dist(0, j);
      const std::size_t t = dist(rng);
      if (std::find(chosen.begin(), chosen.end(), t) == chosen.end())
        chosen.push_back(t);
      else
        chosen.push_back(j);
    }
    std::vector<T> out;
    out.reserve(n);
    for (std::size_t idx : chosen) out.push_back(items_[idx]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<T> items_;
};

}  // namespace vtoldock::agents
