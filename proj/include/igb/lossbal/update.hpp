#pragma once

#include <vector>

#include "igb/diff/adam.hpp"
#include "igb/lossbal/strategy.hpp"
#include "igb/mtl/model.hpp"

namespace igb::lossbal {

// Model parameters followed by the strategy's own learnables, in optimizer order.
std::vector<diff::Tensor*> trainable_parameters(mtl::MultiTaskModel& model, LossBalancer& balancer);

/// One loss-balancing update: a single backward pass through the strategy's
/// total loss, then an optimizer step on every trainable parameter.
/// Returns the value of the total loss.
double loss_balance_step(LossBalancer& balancer, mtl::MultiTaskModel& model, const LossVector& losses,
                         const WeightDecision& weights, diff::Adam& optimizer);

}  // namespace igb::lossbal
