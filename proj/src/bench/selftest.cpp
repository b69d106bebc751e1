#include "igb/bench/selftest.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "igb/bench/metrics.hpp"
#include "igb/bench/record.hpp"
#include "igb/diff/layers.hpp"
#include "igb/diff/ops.hpp"
#include "igb/gradbal/aggregators.hpp"
#include "igb/lossbal/weights.hpp"
#include "igb/mtl/model.hpp"
#include "igb/rl/replay_buffer.hpp"
#include "igb/rl/reward.hpp"

namespace igb::bench {

namespace {

using Check = std::function<std::string()>;  // empty string on success

mtl::TaskBatch random_batch(std::size_t rows, std::size_t dim, std::size_t tasks, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  mtl::TaskBatch b;
  std::vector<double> x(rows * dim);
  for (auto& v : x) v = normal(rng);
  b.inputs = diff::Tensor({rows, dim}, x);
  for (std::size_t k = 0; k < tasks; ++k) {
    std::vector<double> y(rows);
    for (auto& v : y) v = normal(rng);
    b.targets.push_back(diff::Tensor({rows, 1}, y));
  }
  return b;
}

std::string check_gradients() {
  std::mt19937_64 rng(7);
  mtl::ModelShape shape{4, {6}, 5};
  mtl::MultiTaskModel model(shape, {{}, {}}, 11);
  auto batch = random_batch(8, 4, 2, rng);
  diff::Tape tape;
  auto losses = mtl::task_losses(model, tape, batch);
  model.zero_grad();
  tape.backward(diff::add(losses.terms[0], losses.terms[1]));
  const auto params = model.parameters();
  double worst = 0.0;
  for (auto* p : params) {
    for (std::size_t j = 0; j < p->numel(); j += 3) {
      const double keep = p->data()[j], h = 1e-6;
      auto eval = [&] {
        diff::Tape t;
        auto l = mtl::task_losses(model, t, batch);
        return l.values[0] + l.values[1];
      };
      p->data()[j] = keep + h;
      const double up = eval();
      p->data()[j] = keep - h;
      const double down = eval();
      p->data()[j] = keep;
      const double fd = (up - down) / (2 * h), an = p->grad()[j];
      worst = std::max(worst, std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an)));
    }
  }
  if (worst > 1e-5) return "relative error " + std::to_string(worst);
  return {};
}

std::string check_scale_invariance() {
  std::mt19937_64 rng(3);
  mtl::MultiTaskModel model({4, {6}, 5}, {{}, {}, {}}, 5);
  auto batch = random_batch(8, 4, 3, rng);
  auto grads_for = [&](double s) {
    diff::Tape tape;
    auto losses = mtl::task_losses(model, tape, batch);
    for (std::size_t i = 0; i < losses.size(); ++i) {
      losses.terms[i] = diff::scale(losses.terms[i], i == 1 ? s : 1.0);
      losses.values[i] = losses.terms[i].item();
    }
    model.zero_grad();
    tape.backward(lossbal::total_loss_si(losses, {{1.0, 1.0, 1.0}}));
    return diff::flatten_grads(model.shared_parameters());
  };
  const auto a = grads_for(1.0), b = grads_for(50.0);
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i]))) return "trunk gradient changed under rescaling";
  }
  return {};
}

std::string check_igbv1() {
  lossbal::BaselineLosses base;
  std::vector<std::vector<double>> epoch2{{1.0, 2.0}};
  base.capture(epoch2, 2);
  const std::vector<double> l{1.0, 4.0};
  const auto w = lossbal::igbv1_weights(l, base, 3);
  if (std::abs(w.sum() - 2.0) > 1e-9) return "weights do not sum to n";
  if (!(w.lambda[1] > w.lambda[0])) return "larger normalized loss got a smaller weight";
  const auto early = lossbal::igbv1_weights(l, base, 2);
  if (early.lambda != std::vector<double>{1.0, 1.0}) return "weights differ from one before epoch 3";
  return {};
}

std::string check_mgda() {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  for (int t = 0; t < 20; ++t) {
    gradbal::TaskGradients g;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> v(5);
      for (auto& x : v) x = normal(rng);
      g.grads.push_back(v);
    }
    const auto closed = gradbal::min_norm_two(g.grads[0], g.grads[1]);
    const auto fw = gradbal::frank_wolfe_min_norm(g);
    for (std::size_t j = 0; j < 5; ++j) {
      if (std::abs(closed.direction[j] - fw.direction[j]) > 1e-6) return "closed form and Frank-Wolfe disagree";
    }
  }
  return {};
}

std::string check_pcgrad() {
  std::mt19937_64 rng(2);
  gradbal::TaskGradients g{{{1.0, 2.0}, {-1.0, -2.0}}};
  for (double v : gradbal::pcgrad_aggregate(g, rng)) {
    if (v != 0.0) return "antipodal inputs did not cancel";
  }
  gradbal::TaskGradients o{{{1.0, 0.0}, {0.0, 1.0}}};
  if (gradbal::pcgrad_aggregate(o, rng) != std::vector<double>{0.5, 0.5}) return "orthogonal inputs were projected";
  return {};
}

std::string check_reward() {
  lossbal::BaselineLosses base;
  std::vector<std::vector<double>> epoch2{{2.0, 4.0}};
  base.capture(epoch2, 2);
  const std::vector<double> l{1.0, 3.0};
  if (rl::compute_reward(l, l, base, 1e-3, 1e-3) != 0.0) return "unchanged losses gave a nonzero reward";
  const std::vector<double> next{0.5, 2.0};
  const double r = rl::compute_reward(l, next, base, 1e-3, 1e-3);
  if (r != 0.25) return "reward " + std::to_string(r) + ", expected 0.25";
  if (rl::compute_reward(l, next, base, 5e-4, 1e-3) != 2 * r) return "halving lr did not double the reward";
  return {};
}

std::string check_replay_buffer() {
  rl::ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push({{double(i)}, {1.0}, double(i), {double(i)}});
  if (buf.size() != 3 || buf.at(0).reward != 2.0 || buf.at(2).reward != 4.0) return "FIFO overwrite order broken";
  return {};
}

std::string check_record_round_trip() {
  RunRecord r;
  r.method = "IGBv2";
  r.seed = 4;
  r.tasks = 2;
  r.higher_is_better = {false, true};
  r.batches = {{1, 1, {0.1, 2.0 / 3.0}, {1.0, 1.0}, std::nullopt}, {3, 1, {0.1, 0.2}, {0.5, 1.5}, -0.125}};
  r.epochs = {{1, {0.3, 0.4}, {0.5, 0.6}, {0.5, 0.9}, 1e-3, 1.5, 0.25, 0.5}};
  r.selected_epoch = 1;
  r.test_metrics = {0.1, 0.95};
  r.test_losses = {0.1, 0.2};
  if (parse_record(write_record(r)) != r) return "parse(write(r)) differs from r";
  return {};
}

std::string check_metrics() {
  if (compute_delta_m({3.0, 0.5}, {3.0, 0.5}, {false, true}) != 0.0) return "delta_m of a baseline against itself";
  if (std::abs(compute_delta_m({55.0, 90.0}, {50.0, 100.0}, {true, false}) + 10.0) > 1e-12) return "delta_m example";
  if (compute_T(12.5, 12.5) != 1.0) return "T of EW against itself";
  return {};
}

}  // namespace

std::vector<SelftestResult> run_selftest() {
  const std::vector<std::pair<std::string, Check>> checks{
      {"gradients match finite differences", check_gradients},
      {"log-loss objective ignores loss scale", check_scale_invariance},
      {"IGBv1 weights", check_igbv1},
      {"MGDA closed form matches Frank-Wolfe", check_mgda},
      {"PCGrad projections", check_pcgrad},
      {"reward", check_reward},
      {"replay buffer FIFO", check_replay_buffer},
      {"run record round trip", check_record_round_trip},
      {"delta_m and T", check_metrics},
  };
  std::vector<SelftestResult> out;
  for (const auto& [name, fn] : checks) {
    SelftestResult r{name, false, {}};
    try {
      r.detail = fn();
      r.passed = r.detail.empty();
    } catch (const std::exception& e) {
      r.detail = std::string("threw: ") + e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

bool print_selftest(const std::vector<SelftestResult>& results, std::ostream& out) {
  bool ok = true;
  for (const auto& r : results) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name;
    if (!r.passed) out << ": " << r.detail;
    out << "\n";
    ok = ok && r.passed;
  }
  return ok;
}

}  // namespace igb::bench
