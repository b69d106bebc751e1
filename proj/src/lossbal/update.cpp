#include "igb/lossbal/update.hpp"

namespace igb::lossbal {

std::vector<diff::Tensor*> trainable_parameters(mtl::MultiTaskModel& model, LossBalancer& balancer) {
  auto params = model.parameters();
  for (auto* p : balancer.parameters()) params.push_back(p);
  return params;
}

double loss_balance_step(LossBalancer& balancer, mtl::MultiTaskModel& model, const LossVector& losses,
                         const WeightDecision& weights, diff::Adam& optimizer) {
  auto params = trainable_parameters(model, balancer);
  diff::zero_grads(params);
  Var total = balancer.total_loss(losses, weights);
  total.tape().backward(total);
  optimizer.step(params);
  return total.item();
}

}  // namespace igb::lossbal
