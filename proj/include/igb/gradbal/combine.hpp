#pragma once

#include <cstddef>
#include <vector>

#include "igb/diff/adam.hpp"
#include "igb/gradbal/aggregators.hpp"
#include "igb/lossbal/strategy.hpp"
#include "igb/mtl/model.hpp"

namespace igb::gradbal {

struct CombineResult {
  lossbal::WeightDecision weights;
  std::vector<double> shared_direction;  // aggregated theta gradient that was applied
  std::size_t backward_passes = 0;
};

/// Loss balancing and gradient balancing together.
///
/// The balancer picks lambda; each task term (lambda_i log L_i under SI) is
/// backpropagated separately to get the per-task shared-parameter gradients
/// g_i, which the aggregator merges into the trunk update. Each head receives
/// only the gradient of its own task term. All updates go through `optimizer`.
CombineResult combine_step(lossbal::LossBalancer& balancer, GradAggregator& aggregator, mtl::MultiTaskModel& model,
                           const mtl::LossVector& losses, const lossbal::BatchContext& ctx, diff::Adam& optimizer);

// Same, with lambda already chosen for this batch.
CombineResult combine_step(lossbal::LossBalancer& balancer, GradAggregator& aggregator, mtl::MultiTaskModel& model,
                           const mtl::LossVector& losses, const lossbal::WeightDecision& weights,
                           diff::Adam& optimizer);

}  // namespace igb::gradbal
