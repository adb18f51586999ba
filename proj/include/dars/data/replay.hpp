#pragma once

#include <deque>
#include <vector>

#include "dars/common/rng.hpp"
#include "dars/data/transition.hpp"

namespace dars {

// FIFO ring of transitions; uniform sampling with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity);

  void push(Transition tr);
  void push(const std::vector<Transition>& trs);

  // Requires size() >= batch. Uniform with replacement.
  std::vector<Transition> sample(size_t batch, Rng& rng) const;

  size_t size() const { return storage_.size(); }
  size_t capacity() const { return capacity_; }
  bool empty() const { return storage_.empty(); }
  // Insertion order: index 0 is the oldest surviving transition.
  const Transition& at(size_t i) const { return storage_.at(i); }

 private:
  size_t capacity_;
  std::deque<Transition> storage_;
};

}  // namespace dars
