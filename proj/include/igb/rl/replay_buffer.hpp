#pragma once

#include <cstddef>
#include <random>
#include <vector>

namespace igb::rl {

/// (s_{t-1}, a_{t-1}, r_{t-1}, s_t) as stored for off-policy training.
struct Transition {
  std::vector<double> state;
  std::vector<double> action;  // task weights, positive and summing to n
  double reward = 0.0;
  std::vector<double> next_state;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Throws ContractError on non-finite entries, mismatched lengths, or an
// action that is not a positive vector summing to n.
void validate_transition(const Transition& t);

/// Fixed-capacity FIFO ring of transitions.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 10000);

  void push(Transition t);

  std::size_t size() const { return storage_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t write_cursor() const { return cursor_; }
  bool empty() const { return storage_.empty(); }

  // i-th oldest stored transition.
  const Transition& at(std::size_t i) const;
  // All stored transitions, oldest first.
  std::vector<Transition> contents() const;

  // `count` distinct positions (0 = oldest), uniform over subsets.
  std::vector<std::size_t> sample_indices(std::size_t count, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;  // slot the next push overwrites once full
};

}  // namespace igb::rl
