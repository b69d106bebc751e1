#include "igb/diff/layers.hpp"

#include <cmath>

#include "igb/errors.hpp"

namespace igb::diff {

Linear::Linear(std::size_t in, std::size_t out, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(in * out), b(out);
  for (auto& v : w) v = dist(rng);
  for (auto& v : b) v = dist(rng);
  weight = Tensor({in, out}, std::move(w), true);
  bias = Tensor({out}, std::move(b), true);
}

Var Linear::forward(Tape& tape, Var x) {
  return add_bias(matmul(x, tape.param(weight)), tape.param(bias));
}

Mlp::Mlp(const std::vector<std::size_t>& widths, bool relu_output, std::mt19937_64& rng)
    : relu_output_(relu_output) {
  if (widths.size() < 2) throw ConfigError("mlp needs at least an input and an output width");
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    if (widths[i] == 0 || widths[i + 1] == 0) throw ConfigError("mlp widths must be positive");
    layers_.emplace_back(widths[i], widths[i + 1], rng);
  }
}

Var Mlp::forward(Tape& tape, Var x) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(tape, x);
    if (i + 1 < layers_.size() || relu_output_) x = relu(x);
  }
  return x;
}

std::vector<Tensor*> Mlp::parameters() {
  std::vector<Tensor*> out;
  for (auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::vector<const Tensor*> Mlp::parameters() const {
  std::vector<const Tensor*> out;
  for (const auto& l : layers_) {
    out.push_back(&l.weight);
    out.push_back(&l.bias);
  }
  return out;
}

std::size_t Mlp::in_dim() const { return layers_.front().weight.shape()[0]; }
std::size_t Mlp::out_dim() const { return layers_.back().weight.shape()[1]; }

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->numel();
  return n;
}

std::vector<double> Mlp::flat_values() const {
  std::vector<double> out;
  for (const auto* p : parameters()) out.insert(out.end(), p->data().begin(), p->data().end());
  return out;
}

std::vector<double> Mlp::flat_grads() const {
  std::vector<double> out;
  for (const auto* p : parameters()) out.insert(out.end(), p->grad().begin(), p->grad().end());
  return out;
}

std::vector<double> flatten_values(const std::vector<Tensor*>& params) {
  std::vector<double> out;
  for (const auto* p : params) out.insert(out.end(), p->data().begin(), p->data().end());
  return out;
}

std::vector<double> flatten_grads(const std::vector<Tensor*>& params) {
  std::vector<double> out;
  for (const auto* p : params) out.insert(out.end(), p->grad().begin(), p->grad().end());
  return out;
}

void assign_grads(const std::vector<Tensor*>& params, std::span<const double> flat) {
  std::size_t offset = 0;
  for (auto* p : params) {
    auto g = p->grad();
    if (offset + g.size() > flat.size()) throw ShapeError("assign_grads: flat gradient too short");
    std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), g.size(), g.begin());
    offset += g.size();
  }
  if (offset != flat.size()) throw ShapeError("assign_grads: flat gradient too long");
}

}  // namespace igb::diff
