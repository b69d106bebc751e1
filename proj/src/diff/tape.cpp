#include "igb/diff/tape.hpp"

#include <algorithm>

#include "igb/errors.hpp"

namespace igb::diff {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->value(id_);
}

std::span<const double> Var::grad() const {
  if (!tape_) throw ContractError("use of an unbound Var");
  return tape_->grad(id_);
}

Var Tape::constant(Tensor value) {
  value.set_requires_grad(false);
  nodes_.push_back(Node{std::move(value), {}, {}, nullptr, false, false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::param(Tensor& parameter) {
  Tensor copy(parameter.shape(), std::vector<double>(parameter.data().begin(), parameter.data().end()));
  nodes_.push_back(Node{std::move(copy), {}, {}, &parameter, parameter.requires_grad(), false, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  bool needs = false;
  for (auto p : parents) {
    if (p >= nodes_.size()) throw ContractError("parent recorded after child");
    needs = needs || nodes_[p].needs_grad;
  }
  value.set_requires_grad(false);
  nodes_.push_back(Node{std::move(value), std::move(parents), needs ? std::move(backward) : BackwardFn{},
                        nullptr, needs, false, {}});
  return Var(this, nodes_.size() - 1);
}

std::span<const double> Tape::grad(std::size_t id) const {
  const auto& node = nodes_[id];
  if (!node.touched) return {};
  return node.grad;
}

std::span<double> Tape::grad_accum(std::size_t id) {
  auto& node = nodes_[id];
  if (!node.touched) {
    node.grad.assign(node.value.numel(), 0.0);
    node.touched = true;
  }
  return node.grad;
}

void Tape::backward(Var root) {
  if (root.tape_ != this) throw ContractError("backward root belongs to another tape");
  if (root.numel() != 1) {
    throw ContractError("backward needs a scalar root, got shape " + shape_to_string(root.shape()));
  }
  for (auto& node : nodes_) node.touched = false;
  last_visited_ = 0;

  grad_accum(root.id_)[0] = 1.0;
  for (std::size_t id = root.id_ + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (!node.touched || !node.needs_grad) continue;
    if (node.bound) {
      auto target = node.bound->grad();
      for (std::size_t i = 0; i < target.size(); ++i) target[i] += node.grad[i];
    }
    if (node.backward) {
      ++last_visited_;
      node.backward(*this, id);
    }
  }
  ++backward_count_;
}

}  // namespace igb::diff
