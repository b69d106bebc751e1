#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "igb/diff/ops.hpp"
#include "igb/diff/tensor.hpp"

namespace igb::diff {

// Fully connected layer, y = x W + b with W of shape [in, out].
struct Linear {
  Tensor weight;
  Tensor bias;

  Linear() = default;
  Linear(std::size_t in, std::size_t out, std::mt19937_64& rng);

  Var forward(Tape& tape, Var x);
};

/// Stack of Linear layers with relu between them.
///
/// `widths` lists every layer boundary, input first. With `relu_output` the
/// final layer is also followed by relu (used for the shared trunk).
class Mlp {
 public:
  Mlp() = default;
  Mlp(const std::vector<std::size_t>& widths, bool relu_output, std::mt19937_64& rng);

  Var forward(Tape& tape, Var x);

  std::vector<Tensor*> parameters();
  std::vector<const Tensor*> parameters() const;
  std::size_t in_dim() const;
  std::size_t out_dim() const;
  std::size_t parameter_count() const;

  // Flattened copy of all parameter values / gradients, in parameters() order.
  std::vector<double> flat_values() const;
  std::vector<double> flat_grads() const;

 private:
  std::vector<Linear> layers_;
  bool relu_output_ = false;
};

// Flattening helpers over arbitrary parameter lists.
std::vector<double> flatten_values(const std::vector<Tensor*>& params);
std::vector<double> flatten_grads(const std::vector<Tensor*>& params);
void assign_grads(const std::vector<Tensor*>& params, std::span<const double> flat);

}  // namespace igb::diff
