#include "igb/gradbal/combine.hpp"

#include "igb/diff/layers.hpp"
#include "igb/errors.hpp"
#include "igb/lossbal/update.hpp"

namespace igb::gradbal {

CombineResult combine_step(lossbal::LossBalancer& balancer, GradAggregator& aggregator, mtl::MultiTaskModel& model,
                           const mtl::LossVector& losses, const lossbal::BatchContext& ctx, diff::Adam& optimizer) {
  auto weights = balancer.weights(losses, ctx);
  return combine_step(balancer, aggregator, model, losses, weights, optimizer);
}

CombineResult combine_step(lossbal::LossBalancer& balancer, GradAggregator& aggregator, mtl::MultiTaskModel& model,
                           const mtl::LossVector& losses, const lossbal::WeightDecision& weights,
                           diff::Adam& optimizer) {
  const std::size_t n = losses.size();
  if (balancer.task_count() != n || model.task_count() != n || weights.size() != n) {
    throw ConfigError("combine_step: balancer has " + std::to_string(balancer.task_count()) + " tasks, model " +
                      std::to_string(model.task_count()) + ", losses " + std::to_string(n));
  }
  if (aggregator.arity() != 0 && aggregator.arity() != n) {
    throw ConfigError("combine_step: aggregator " + aggregator.name() + " takes " +
                      std::to_string(aggregator.arity()) + " tasks, got " + std::to_string(n));
  }
  if (losses.terms.empty()) throw ContractError("combine_step: losses are not attached to a tape");

  auto params = lossbal::trainable_parameters(model, balancer);
  auto shared = model.shared_parameters();
  diff::zero_grads(params);

  diff::Tape& tape = losses.terms.front().tape();
  const std::size_t passes_before = tape.backward_count();
  TaskGradients per_task;
  per_task.grads.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Heads of other tasks receive nothing from this term, so only the trunk needs clearing.
    diff::zero_grads(shared);
    diff::Var term = balancer.task_term(losses, weights, i);
    tape.backward(term);
    per_task.grads.push_back(diff::flatten_grads(shared));
  }

  CombineResult result;
  result.weights = weights;
  result.shared_direction = aggregator.aggregate(per_task);
  result.backward_passes = tape.backward_count() - passes_before;
  diff::assign_grads(shared, result.shared_direction);
  optimizer.step(params);
  return result;
}

}  // namespace igb::gradbal
