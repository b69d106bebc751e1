#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "igb/diff/tensor.hpp"

namespace igb::diff {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t numel() const { return value().numel(); }
  double item() const { return value().item(); }
  // Gradient of the most recent backward root with respect to this value.
  std::span<const double> grad() const;

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Propagates the gradient of node `self` into the gradients of its parents.
using BackwardFn = std::function<void(Tape& tape, std::size_t self)>;

/// Records operations in execution order for reverse-mode differentiation.
///
/// Nodes are appended by the ops in ops.hpp, so parents always precede their
/// children. A tape is built fresh for each forward pass; backward may be
/// called several times on the same tape (once per root), each call
/// recomputing node gradients from scratch and accumulating into the bound
/// parameters' grad buffers.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // Binds a parameter; backward adds d(root)/d(parameter) into parameter.grad().
  Var param(Tensor& parameter);

  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }
  // Number of completed backward passes on this tape.
  std::size_t backward_count() const { return backward_count_; }
  // Nodes whose backward closure ran during the most recent pass.
  std::size_t last_visited() const { return last_visited_; }

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::span<const double> grad(std::size_t id) const;
  // Gradient buffer of a node for accumulation (+=) during backward.
  std::span<double> grad_accum(std::size_t id);

 private:
  struct Node {
    Tensor value;
    std::vector<std::size_t> parents;
    BackwardFn backward;
    Tensor* bound = nullptr;
    bool needs_grad = false;
    bool touched = false;
    std::vector<double> grad;
  };

  std::vector<Node> nodes_;
  std::size_t backward_count_ = 0;
  std::size_t last_visited_ = 0;
};

}  // namespace igb::diff
