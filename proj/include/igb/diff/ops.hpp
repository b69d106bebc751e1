#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "igb/diff/tape.hpp"

// Differentiable operations. Every op records its result on the tape of its
// inputs; all inputs must share that tape. Rank-1 tensors behave as a single
// row wherever a row-wise op is involved.
namespace igb::diff {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
// x [m,n] plus bias [n] on every row; the only broadcast the library supports.
Var add_bias(Var x, Var bias);
Var scale(Var a, double factor);
Var shift(Var a, double offset);

Var relu(Var a);
Var tanh(Var a);
Var log(Var a);  // throws DomainError on non-positive input
Var exp(Var a);
Var square(Var a);
Var clamp(Var a, double lo, double hi);
Var minimum(Var a, Var b);

Var softmax(Var a);  // row-wise

Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);  // [m,n] -> [m,1]

Var concat_cols(Var a, Var b);
Var slice_cols(Var a, std::size_t begin, std::size_t end);

// Scalar views of a vector of losses.
Var element(Var a, std::size_t index);
Var stack(std::span<const Var> scalars);
Var weighted_sum(std::span<const Var> scalars, std::span<const double> weights);

// Mean over all entries of (prediction - target)^2.
Var mse(Var prediction, Var target);
// Mean negative log-likelihood of integer labels under row-wise softmax(logits).
Var cross_entropy(Var logits, std::span<const std::size_t> labels);
// Row-wise sum of log N(x; mean, exp(log_std)^2), shape [m,1].
Var gaussian_log_prob(Var x, Var mean, Var log_std);

}  // namespace igb::diff
