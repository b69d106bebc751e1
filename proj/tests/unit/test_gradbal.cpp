#include <doctest.h>

#include <cmath>
#include <random>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "igb/errors.hpp"
#include "igb/gradbal/aggregators.hpp"
#include "igb/gradbal/combine.hpp"
#include "igb/lossbal/update.hpp"

using namespace igb;
using namespace igb::gradbal;
using testing::dot;
using testing::norm;

namespace {

std::vector<double> random_vec(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  for (auto& x : v) x = normal(rng);
  return v;
}

TaskGradients random_grads(std::size_t n, std::size_t d, std::mt19937_64& rng) {
  TaskGradients g;
  for (std::size_t i = 0; i < n; ++i) g.grads.push_back(random_vec(d, rng));
  return g;
}

}  // namespace

TEST_CASE("mgda trivial cases") {
  const std::vector<double> g{1.0, -2.0, 0.5};
  auto same = mgda_aggregate({{g, g}});
  for (std::size_t j = 0; j < 3; ++j) CHECK(same.direction[j] == doctest::Approx(g[j]).epsilon(1e-14));

  const std::vector<double> neg{-1.0, 2.0, -0.5};
  auto opp = mgda_aggregate({{g, neg}});
  CHECK(norm(opp.direction) < 1e-14);
  CHECK(opp.weights.gamma[0] == doctest::Approx(0.5).epsilon(1e-14));

  auto zero = mgda_aggregate({{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}}});
  CHECK(zero.direction == std::vector<double>{0.0, 0.0});
  for (double v : zero.weights.gamma) CHECK(v == doctest::Approx(1.0 / 3.0));

  auto single = mgda_aggregate({{g}});
  CHECK(single.direction == g);
}

TEST_CASE("mgda matches a simplex-grid oracle") {
  std::mt19937_64 rng(21);
  for (std::size_t n : {2, 3}) {
    for (std::size_t d : {2, 5}) {
      for (int t = 0; t < 10; ++t) {
        auto g = random_grads(n, d, rng);
        const auto fw = frank_wolfe_min_norm(g);
        CHECK(std::abs(norm(fw.direction) - testing::grid_min_norm(g.grads, 1e-2)) < 2e-2);
        CHECK(norm(fw.direction) <= testing::grid_min_norm(g.grads, 1e-2) + 1e-6);
      }
    }
  }
}

TEST_CASE("mgda output is a convex combination no longer than any input") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 2 + t % 4;
    auto g = random_grads(n, 7, rng);
    const auto r = mgda_aggregate(g);
    double sum = 0.0, lo = 1.0;
    for (double v : r.weights.gamma) {
      sum += v;
      lo = std::min(lo, v);
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
    CHECK(lo >= -1e-12);
    for (std::size_t j = 0; j < 7; ++j) {
      double rebuilt = 0.0;
      for (std::size_t i = 0; i < n; ++i) rebuilt += r.weights.gamma[i] * g.grads[i][j];
      CHECK(std::abs(rebuilt - r.direction[j]) < 1e-10);
    }
    for (const auto& gi : g.grads) CHECK(norm(r.direction) <= norm(gi) + 1e-9);
  }
}

TEST_CASE("mgda closed form agrees with Frank-Wolfe for two tasks") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 100; ++t) {
    auto g = random_grads(2, 1 + t % 6, rng);
    const auto closed = min_norm_two(g.grads[0], g.grads[1]);
    const auto fw = frank_wolfe_min_norm(g);
    for (std::size_t j = 0; j < g.dim(); ++j) CHECK(std::abs(closed.direction[j] - fw.direction[j]) < 1e-6);
  }
}

TEST_CASE("task gradient validation") {
  CHECK_THROWS_AS(mgda_aggregate({}), ContractError);
  CHECK_THROWS_AS(mgda_aggregate({{{1.0, 2.0}, {1.0}}}), ShapeError);
  CHECK_THROWS_AS(mgda_aggregate({{{1.0, NAN}, {1.0, 0.0}}}), DomainError);
}

TEST_CASE("pcgrad properties") {
  std::mt19937_64 rng(3);
  const auto orth = pcgrad_aggregate({{{2.0, 0.0}, {0.0, 3.0}}}, rng);
  CHECK(orth == std::vector<double>{1.0, 1.5});

  const auto anti = pcgrad_aggregate({{{1.5, -2.0}, {-1.5, 2.0}}}, rng);
  CHECK(anti == std::vector<double>{0.0, 0.0});

  const auto hand = pcgrad_aggregate({{{1.0, 0.0}, {-1.0, 1.0}}}, rng);
  CHECK(hand == std::vector<double>{0.25, 0.75});

  const auto with_zero = pcgrad_aggregate({{{1.0, 1.0}, {0.0, 0.0}}}, rng);
  CHECK(with_zero == std::vector<double>{0.5, 0.5});

  for (int t = 0; t < 1000; ++t) {
    auto g = random_grads(2, 4, rng);
    // Reconstruct the projected gradients from the mean and the known formula.
    auto proj = [&](const std::vector<double>& a, const std::vector<double>& b) {
      const double ab = dot(a, b);
      std::vector<double> out = a;
      if (ab < 0.0) {
        const double c = ab / dot(b, b);
        for (std::size_t j = 0; j < a.size(); ++j) out[j] -= c * b[j];
      }
      return out;
    };
    const auto p1 = proj(g.grads[0], g.grads[1]), p2 = proj(g.grads[1], g.grads[0]);
    CHECK(dot(p1, g.grads[1]) >= -1e-9);
    CHECK(dot(p2, g.grads[0]) >= -1e-9);
    const auto mean = pcgrad_aggregate(g, rng);
    for (std::size_t j = 0; j < 4; ++j) CHECK(mean[j] == doctest::Approx(0.5 * (p1[j] + p2[j])).epsilon(1e-12));
  }
}

TEST_CASE("aggregator names and factory") {
  for (const auto& name : aggregator_names()) CHECK(to_string(parse_aggregator(name)) == name);
  CHECK_THROWS_WITH_AS(parse_aggregator("CAGrad"), doctest::Contains("PCGrad"), ConfigError);
  CHECK(make_aggregator(AggregatorKind::MGDA)->name() == "MGDA");
  CHECK(make_aggregator(AggregatorKind::PCGrad, 4)->name() == "PCGrad");
  CHECK(mean_aggregate({{{1.0, 2.0}, {3.0, 6.0}}}) == std::vector<double>{2.0, 4.0});
}

TEST_CASE("combine_step takes n backward passes") {
  std::mt19937_64 rng(12);
  auto batch = testing::random_batch(10, 3, 3, rng);
  mtl::MultiTaskModel model({3, {6}, 4}, {{}, {}, {}}, 9);
  auto balancer = lossbal::make_loss_balancer(lossbal::StrategyKind::SI, 3);
  MgdaAggregator agg;
  diff::Adam opt({0.01});
  diff::Tape tape;
  auto losses = mtl::task_losses(model, tape, batch);
  const auto r = combine_step(*balancer, agg, model, losses, lossbal::BatchContext{}, opt);
  CHECK(r.backward_passes == 3);
  CHECK(tape.backward_count() == 3);
  CHECK(r.weights.lambda == std::vector<double>{1.0, 1.0, 1.0});
  CHECK(r.shared_direction.size() == diff::flatten_grads(model.shared_parameters()).size());
}

TEST_CASE("combine_step head gradients ignore other tasks' losses") {
  std::mt19937_64 rng(13);
  auto batch = testing::random_batch(10, 3, 2, rng);
  auto other = batch;
  for (auto& v : other.targets[1].data()) v += 5.0;
  auto head0_grad = [&](const mtl::TaskBatch& b) {
    mtl::MultiTaskModel model({3, {6}, 4}, {{}, {}}, 2);
    auto balancer = lossbal::make_loss_balancer(lossbal::StrategyKind::IGBv1, 2);
    PcGradAggregator agg(1);
    diff::Adam opt({0.01});
    diff::Tape tape;
    auto losses = mtl::task_losses(model, tape, b);
    combine_step(*balancer, agg, model, losses, lossbal::WeightDecision{{1.0, 1.0}}, opt);
    return std::pair{diff::flatten_grads(model.task_parameters(0)), diff::flatten_grads(model.task_parameters(1))};
  };
  const auto a = head0_grad(batch), b = head0_grad(other);
  CHECK(a.first == b.first);
  CHECK_FALSE(a.second == b.second);
}

TEST_CASE("combine_step with the mean aggregator equals loss balancing with lambda / n") {
  std::mt19937_64 rng(31);
  const std::size_t n = 3;
  mtl::MultiTaskModel a({4, {8}, 5}, {{}, {}, {}}, 4), b = a;
  auto bal_a = lossbal::make_loss_balancer(lossbal::StrategyKind::SI, n);
  auto bal_b = lossbal::make_loss_balancer(lossbal::StrategyKind::SI, n);
  MeanAggregator mean;
  diff::Adam opt_a({0.01}), opt_b({0.01});
  for (int step = 0; step < 20; ++step) {
    auto batch = testing::random_batch(8, 4, n, rng);
    const lossbal::WeightDecision w{{0.5, 1.2, 1.3}};
    {
      diff::Tape tape;
      auto losses = mtl::task_losses(a, tape, batch);
      combine_step(*bal_a, mean, a, losses, w, opt_a);
    }
    {
      diff::Tape tape;
      auto losses = mtl::task_losses(b, tape, batch);
      lossbal::WeightDecision scaled = w;
      for (auto& v : scaled.lambda) v /= static_cast<double>(n);
      auto params = b.parameters();
      diff::zero_grads(params);
      tape.backward(lossbal::total_loss_si(losses, scaled));
      for (std::size_t i = 0; i < n; ++i)
        for (auto* p : b.task_parameters(i))
          for (auto& g : p->grad()) g *= static_cast<double>(n);
      opt_b.step(params);
    }
  }
  auto va = std::vector<double>{}, vb = std::vector<double>{};
  for (auto* p : a.parameters()) va.insert(va.end(), p->data().begin(), p->data().end());
  for (auto* p : b.parameters()) vb.insert(vb.end(), p->data().begin(), p->data().end());
  for (std::size_t i = 0; i < va.size(); ++i) CHECK(std::abs(va[i] - vb[i]) < 1e-10);
}

TEST_CASE("combine_step rejects mismatched arity") {
  std::mt19937_64 rng(1);
  mtl::MultiTaskModel model({2, {3}, 2}, {{}, {}}, 1);
  auto balancer = lossbal::make_loss_balancer(lossbal::StrategyKind::SI, 3);
  MeanAggregator mean;
  diff::Adam opt;
  diff::Tape tape;
  auto losses = mtl::task_losses(model, tape, testing::random_batch(4, 2, 2, rng));
  CHECK_THROWS_AS(combine_step(*balancer, mean, model, losses, lossbal::WeightDecision{{1.0, 1.0}}, opt), ConfigError);
}
