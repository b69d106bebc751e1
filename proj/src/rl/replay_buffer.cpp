#include "igb/rl/replay_buffer.hpp"

#include <cmath>
#include <numeric>
#include <string>
#include <unordered_set>

#include "igb/errors.hpp"

namespace igb::rl {

void validate_transition(const Transition& t) {
  const std::size_t n = t.state.size();
  if (n == 0 || t.action.size() != n || t.next_state.size() != n) {
    throw ContractError("transition: state, action and next_state must share a positive length");
  }
  if (!std::isfinite(t.reward)) throw ContractError("transition: reward is not finite");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(t.state[i]) || !std::isfinite(t.next_state[i])) {
      throw ContractError("transition: state entry " + std::to_string(i) + " is not finite");
    }
    if (!(t.action[i] > 0.0) || !std::isfinite(t.action[i])) {
      throw ContractError("transition: action entry " + std::to_string(i) + " is not positive");
    }
    total += t.action[i];
  }
  if (std::abs(total - static_cast<double>(n)) > 1e-9) {
    throw ContractError("transition: action sums to " + std::to_string(total) + ", expected " + std::to_string(n));
  }
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  validate_transition(t);
  if (storage_.size() < capacity_) {
    storage_.push_back(std::move(t));
    cursor_ = storage_.size() % capacity_;
    return;
  }
  storage_[cursor_] = std::move(t);
  cursor_ = (cursor_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= storage_.size()) throw ContractError("replay buffer: index " + std::to_string(i) + " out of range");
  if (storage_.size() < capacity_) return storage_[i];
  return storage_[(cursor_ + i) % capacity_];
}

std::vector<Transition> ReplayBuffer::contents() const {
  std::vector<Transition> out;
  out.reserve(storage_.size());
  for (std::size_t i = 0; i < storage_.size(); ++i) out.push_back(at(i));
  return out;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t count, std::mt19937_64& rng) const {
  const std::size_t n = storage_.size();
  if (count > n) {
    throw ContractError("replay buffer: cannot draw " + std::to_string(count) + " of " + std::to_string(n));
  }
  // Floyd's algorithm: each subset of size `count` is equally likely.
  std::unordered_set<std::size_t> chosen;
  std::vector<std::size_t> out;
  out.reserve(count);
  for (std::size_t j = n - count; j < n; ++j) {
    std::uniform_int_distribution<std::size_t> dist(0, j);
    const std::size_t t = dist(rng);
    const std::size_t pick = chosen.insert(t).second ? t : j;
    if (pick == j) chosen.insert(j);
    out.push_back(pick);
  }
  return out;
}

}  // namespace igb::rl
