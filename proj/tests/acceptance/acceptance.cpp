// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <CLI11.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <ctime>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "../support/schedule_replay.hpp"
#include "../support/fixtures.hpp"
#include "../support/op_cases.hpp"
#include "../support/oracles.hpp"
#include "igb/bench/config.hpp"
#include "igb/bench/sweep.hpp"
#include "igb/gradbal/aggregators.hpp"
#include "igb/gradbal/combine.hpp"
#include "igb/lossbal/strategy.hpp"
#include "igb/mtl/synthetic.hpp"
#include "igb/rl/reward.hpp"
#include "igb/rl/sac.hpp"

using namespace igb;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

double process_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_PROCESS_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

std::vector<double> random_vec(std::size_t d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  std::vector<double> v(d);
  for (auto& x : v) x = normal(rng);
  return v;
}

void gradient_correctness(Outcome& out) {
  const double cpu0 = process_cpu_seconds();
  double worst_op = 0.0, worst_model = 0.0;
  std::string worst_name;
  const auto cases = testing::op_cases();
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    for (const auto& c : cases) {
      std::mt19937_64 rng(seed * 1000 + 17);
      const double e = testing::gradcheck(c.fn, c.inputs(rng));
      if (e > worst_op) {
        worst_op = e;
        worst_name = c.name;
      }
    }
    std::mt19937_64 rng(seed);
    mtl::ModelShape shape{4, {7, 6}, 5};
    std::vector<mtl::TaskHeadSpec> heads{{}, {mtl::TaskKind::Classification, 3}, {}};
    mtl::MultiTaskModel model(shape, heads, seed + 1);
    auto batch = testing::random_batch(6, 4, 3, rng);
    std::uniform_int_distribution<int> cls(0, 2);
    for (auto& v : batch.targets[1].data()) v = cls(rng);
    worst_model = std::max(worst_model, testing::model_gradcheck(model, batch));
  }
  const double secs = process_cpu_seconds() - cpu0;
  out.require(worst_op < 1e-4, "op relative error");
  out.require(worst_model < 1e-4, "model relative error");
  out.require(secs < 30.0, "runtime");
  out.detail << cases.size() << " ops x 100 seeds, worst op error " << worst_op << " (" << worst_name
             << "), worst model error " << worst_model << ", " << std::setprecision(3) << secs << " s CPU";
}

void scale_invariance(Outcome& out) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> factor(0.01, 100.0), weight(0.2, 2.0);
  double worst_si = 0.0, least_ws = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < 100; ++trial) {
    mtl::MultiTaskModel model({5, {8, 8}, 6}, {{}, {}, {}}, static_cast<std::uint64_t>(trial));
    auto batch = testing::random_batch(16, 5, 3, rng);
    std::vector<double> lambda{weight(rng), weight(rng), weight(rng)};
    std::vector<double> c{factor(rng), factor(rng), factor(rng)};
    const std::vector<double> ones{1.0, 1.0, 1.0};
    using testing::TotalKind;
    worst_si = std::max(worst_si,
                        testing::relative_diff(testing::rescaled_gradients(model, batch, lambda, ones, TotalKind::ScaleInvariant),
                                               testing::rescaled_gradients(model, batch, lambda, c, TotalKind::ScaleInvariant)));
    least_ws = std::min(least_ws,
                        testing::relative_diff(testing::rescaled_gradients(model, batch, lambda, ones, TotalKind::WeightedSum),
                                               testing::rescaled_gradients(model, batch, lambda, c, TotalKind::WeightedSum)));
  }
  out.require(worst_si < 1e-6, "scale-invariant gradients moved");
  out.require(least_ws >= 1e-6, "weighted-sum gradients did not move");
  out.detail << "100 trials, worst SI change " << worst_si << ", smallest weighted-sum change " << least_ws;
}

void igbv1_contract(Outcome& out) {
  std::mt19937_64 rng(77);
  // Baselines span six orders of magnitude; normalized losses stay in [0.01, 10].
  std::uniform_real_distribution<double> log_base(-3.0, 3.0), log_ratio(-2.0, 1.0);
  std::uniform_int_distribution<std::size_t> tasks(2, 8);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = tasks(rng);
    std::vector<double> l(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = std::pow(10.0, log_base(rng));
      l[i] = b[i] * std::pow(10.0, log_ratio(rng));
    }
    lossbal::BaselineLosses base;
    std::vector<std::vector<double>> epoch{b};
    base.capture(epoch, 2);
    const auto w = lossbal::igbv1_weights(l, base, 3 + static_cast<std::size_t>(trial) % 50);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      sum += w.lambda[i];
      if (!(w.lambda[i] > 0.0)) ++violations;
      for (std::size_t j = 0; j < n; ++j) {
        if (l[i] / b[i] > l[j] / b[j] && !(w.lambda[i] > w.lambda[j])) ++violations;
      }
    }
    if (std::abs(sum - static_cast<double>(n)) > 1e-9) ++violations;
    for (std::size_t e : {1, 2}) {
      if (lossbal::igbv1_weights(l, lossbal::BaselineLosses{}, e).lambda != std::vector<double>(n, 1.0)) ++violations;
    }
  }
  lossbal::BaselineLosses unit;
  std::vector<std::vector<double>> ones{{1.0, 1.0}};
  unit.capture(ones, 2);
  const auto w = lossbal::igbv1_weights(std::vector<double>{1.0, 2.0}, unit, 3);
  const auto direct = testing::direct_scaled_softmax({1.0, 2.0});
  const double example_err = std::max(std::abs(w.lambda[0] - direct[0]), std::abs(w.lambda[1] - direct[1]));
  const double published_err = std::max(std::abs(w.lambda[0] - 0.5379), std::abs(w.lambda[1] - 1.4621));
  out.require(violations == 0, "property violations");
  out.require(example_err < 1e-4 && published_err < 1e-4, "worked example");
  out.detail << "1000 random pairs, " << violations << " violations; worked example [" << std::setprecision(6)
             << w.lambda[0] << ", " << w.lambda[1] << "]";
}

void mgda_oracle(Outcome& out) {
  std::mt19937_64 rng(404);
  double worst_grid = 0.0, worst_closed = 0.0;
  std::size_t beyond = 0, fw_below_grid = 0;
  for (std::size_t n : {2, 3}) {
    for (std::size_t d : {2, 5}) {
      for (int t = 0; t < 50; ++t) {
        gradbal::TaskGradients g;
        for (std::size_t i = 0; i < n; ++i) g.grads.push_back(random_vec(d, rng));
        const auto fw = gradbal::frank_wolfe_min_norm(g);
        const double fw_norm = testing::norm(fw.direction), grid = testing::grid_min_norm(g.grads, 1e-3);
        worst_grid = std::max(worst_grid, std::abs(fw_norm - grid));
        if (std::abs(fw_norm - grid) >= 1e-3) {
          ++beyond;
          fw_below_grid += fw_norm < grid;
        }
        if (n == 2) {
          const auto closed = gradbal::min_norm_two(g.grads[0], g.grads[1]);
          for (std::size_t j = 0; j < d; ++j)
            worst_closed = std::max(worst_closed, std::abs(closed.direction[j] - fw.direction[j]));
        }
      }
    }
  }
  out.require(worst_grid < 1e-3, "grid oracle");
  out.require(worst_closed < 1e-6, "closed form");
  out.detail << "200 gradient sets, worst |norm - grid min| " << worst_grid << " (" << beyond << " sets beyond 1e-3, "
             << fw_below_grid << " of them with the Frank-Wolfe norm below the grid minimum), worst closed-form gap "
             << worst_closed;
}

void pcgrad_properties(Outcome& out) {
  std::mt19937_64 rng(5);
  const auto orth = gradbal::pcgrad_aggregate({{{2.0, 0.0, 1.0}, {0.0, 3.0, 0.0}}}, rng);
  out.require(orth == std::vector<double>{1.0, 1.5, 0.5}, "orthogonal identity");
  const auto anti = gradbal::pcgrad_aggregate({{{0.5, -1.5, 2.0}, {-0.5, 1.5, -2.0}}}, rng);
  out.require(anti == std::vector<double>{0.0, 0.0, 0.0}, "antipodal zero");
  const auto hand = gradbal::pcgrad_aggregate({{{1.0, 0.0}, {-1.0, 1.0}}}, rng);
  out.require(hand == std::vector<double>{0.25, 0.75}, "hand example");
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const auto g1 = random_vec(4, rng), g2 = random_vec(4, rng);
    const auto mean = gradbal::pcgrad_aggregate({{g1, g2}}, rng);
    // Recover the projected pair from the mean: g1' - g1 is along g2 and g2' - g2 along g1.
    auto project = [](const std::vector<double>& a, const std::vector<double>& b) {
      const double ab = testing::dot(a, b);
      auto r = a;
      if (ab < 0.0)
        for (std::size_t j = 0; j < a.size(); ++j) r[j] -= ab / testing::dot(b, b) * b[j];
      return r;
    };
    const auto p1 = project(g1, g2), p2 = project(g2, g1);
    for (std::size_t j = 0; j < 4; ++j) {
      if (std::abs(mean[j] - 0.5 * (p1[j] + p2[j])) > 1e-12 * (1.0 + std::abs(mean[j]))) out.require(false, "mean of projections");
    }
    worst = std::min(worst, std::min(testing::dot(p1, g2), testing::dot(p2, g1)));
  }
  out.require(worst >= -1e-9, "post-projection dot products");
  out.detail << "exact cases ok, mean [" << hand[0] << ", " << hand[1] << "], min post-projection dot " << worst;
}

void reward_contract(Outcome& out) {
  // A logged trace of batch losses with a decaying learning rate.
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  const std::size_t n = 3;
  std::vector<std::vector<double>> trace;
  std::vector<double> lrs;
  for (std::size_t k = 0; k < 200; ++k) {
    std::vector<double> l(n);
    for (std::size_t i = 0; i < n; ++i) l[i] = std::pow(10.0, static_cast<double>(i)) * u(rng) / std::sqrt(k + 1.0);
    trace.push_back(l);
    lrs.push_back(1e-3 * std::pow(0.5, static_cast<double>(k / 50)));
  }
  lossbal::BaselineLosses base;
  std::vector<std::vector<double>> epoch2(trace.begin(), trace.begin() + 10);
  base.capture(epoch2, 2);
  const auto& lb = base.values();

  bool zero_ok = true, linear_ok = true, min_ok = true, alpha_ok = true, back_ok = true;
  for (std::size_t k = 0; k + 1 < trace.size(); ++k) {
    const auto& a = trace[k];
    const auto& b = trace[k + 1];
    zero_ok &= rl::compute_reward(a, a, base, lrs[k], 1e-3) == 0.0;
    linear_ok &= rl::compute_reward(a, b, base, lrs[k] / 2, 1e-3) == 2.0 * rl::compute_reward(a, b, base, lrs[k], 1e-3);

    double mn = (a[0] - b[0]) / lb[0], sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = (a[i] - b[i]) / lb[i];
      mn = std::min(mn, d);
      sum += d;
    }
    const double alpha = 1e-3 / lrs[k];
    const double full = alpha * mn, no_min = alpha * (sum / static_cast<double>(n)), no_alpha = mn;
    min_ok &= rl::compute_reward(a, b, base, lrs[k], 1e-3, {false, true}) == no_min;
    alpha_ok &= rl::compute_reward(a, b, base, lrs[k], 1e-3, {true, false}) == no_alpha;
    back_ok &= rl::compute_reward(a, b, base, lrs[k], 1e-3, {true, true}) == full;
  }
  out.require(zero_ok, "zero decline");
  out.require(linear_ok, "alpha linearity");
  out.require(min_ok, "min to mean switch");
  out.require(alpha_ok, "alpha to one switch");
  out.require(back_ok, "switches restored");
  out.detail << "199 logged transitions, all comparisons bit-identical";
}

void sac_sanity(Outcome& out) {
  const double cpu0 = process_cpu_seconds();
  rl::SacConfig cfg;
  cfg.gamma = 0.0;
  {
    rl::SacAgent agent(2, cfg, 9);
    rl::ReplayBuffer buf(cfg.update_batch);
    for (std::size_t i = 0; i < cfg.update_batch; ++i) buf.push(rl::Transition{{0.5, 1.5}, {0.8, 1.2}, 0.7, {0.5, 1.5}});
    double last = 0.0;
    for (int k = 0; k < 200; ++k) last = agent.update(buf).critic1_loss;
    out.require(last < 1e-3, "critic loss");
    out.detail << "critic loss after 200 updates " << last << "; ";
  }
  // Stateless bandit with reward -|a - a*|^2; a* is reachable by construction.
  rl::SacAgent agent(3, cfg, 7);
  const std::vector<double> astar = testing::direct_scaled_softmax({0.4, -0.5, 0.1});
  const std::vector<double> s{1.0, 1.0, 1.0};
  rl::ReplayBuffer buf;
  std::size_t updates = 0;
  while (updates < 5000) {
    const auto a = agent.select_action(s, false).lambda;
    double r = 0.0;
    for (std::size_t i = 0; i < 3; ++i) r -= (a[i] - astar[i]) * (a[i] - astar[i]);
    buf.push(rl::Transition{s, a, r, s});
    if (buf.size() >= cfg.update_batch) {
      agent.update(buf);
      ++updates;
    }
  }
  const auto a = agent.select_action(s, true).lambda;
  double err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) err = std::max(err, std::abs(a[i] - astar[i]));
  const double secs = process_cpu_seconds() - cpu0;
  out.require(err < 0.15, "bandit optimum");
  out.require(secs < 120.0, "runtime");
  out.detail << "bandit max coordinate error " << err << " after 5000 updates, " << std::setprecision(3) << secs << " s CPU";
}

void trace_fidelity(Outcome& out) {
  struct Script {
    std::size_t epochs, batches;
    rl::Igbv2Config cfg;
  };
  rl::Igbv2Config three;  // defaults: update_e 4, use_e 6, every 50 batches
  rl::Igbv2Config seven;
  seven.sac.update_batch = 32;
  std::size_t transitions = 0, rounds = 0;
  for (const auto& sc : {Script{3, 40, three}, Script{7, 30, seven}}) {
    const auto run = testing::run_scripted(3, sc.epochs, sc.batches, sc.cfg, 2.5e-4, 1e-3, 19);
    const auto expect = testing::replay_schedule(run.log, sc.cfg, 2.5e-4, 1e-3);
    out.require(run.buffer == expect.buffer, "buffer contents");
    for (std::size_t k = 0; k < run.log.size(); ++k) {
      if (run.log[k].source != expect.sources[k]) out.require(false, "weight source");
      if (run.log[k].train_attempted != expect.train_attempted[k]) out.require(false, "training cadence");
      if (run.log[k].reward != expect.rewards[k]) out.require(false, "reward");
      rounds += run.log[k].train_attempted;
    }
    out.require(!run.agent_changed_outside_training, "agent isolation");
    transitions += run.buffer.size();
  }
  out.detail << "3-epoch and 7-epoch scripts, " << transitions << " transitions and " << rounds
             << " training rounds match the offline replay";
}

void combination_equivalence(Outcome& out) {
  auto cfg = mtl::SuiteConfig::scaled_default();
  cfg.samples = 300;
  cfg.batch_size = 32;
  cfg.model.trunk_widths = {16, 16};
  cfg.model.head_width = 8;
  mtl::SyntheticSuite suite(cfg, 3);
  const std::size_t n = suite.task_count();
  auto a = suite.make_model(5), b = suite.make_model(5);
  lossbal::Igbv1 bal_a(n), bal_b(n);
  gradbal::MeanAggregator mean;
  diff::Adam opt_a({1e-3}), opt_b({1e-3});
  std::mt19937_64 shuffle(1);
  double worst = 0.0;
  std::size_t batches = 0;
  const std::size_t bpe = suite.batches_per_epoch();
  for (std::size_t epoch = 1; batches < 100; ++epoch) {
    auto epoch_batches = suite.epoch_batches(epoch, shuffle);
    for (std::size_t k = 0; k < epoch_batches.size() && batches < 100; ++k) {
      ++batches;
      lossbal::BatchContext ctx{epoch, k + 1, bpe, batches, 1e-3, 1e-3};
      {
        diff::Tape tape;
        auto losses = mtl::task_losses(a, tape, epoch_batches[k]);
        gradbal::combine_step(bal_a, mean, a, losses, ctx, opt_a);
      }
      {
        diff::Tape tape;
        auto losses = mtl::task_losses(b, tape, epoch_batches[k]);
        auto w = bal_b.weights(losses, ctx);
        for (auto& v : w.lambda) v /= static_cast<double>(n);
        auto params = b.parameters();
        diff::zero_grads(params);
        tape.backward(lossbal::total_loss_si(losses, w));
        // Each head's own term carries lambda_i, not lambda_i / n.
        for (std::size_t i = 0; i < n; ++i)
          for (auto* p : b.task_parameters(i))
            for (auto& g : p->grad()) g *= static_cast<double>(n);
        opt_b.step(params);
      }
      const auto ta = diff::flatten_values(a.shared_parameters()), tb = diff::flatten_values(b.shared_parameters());
      for (std::size_t j = 0; j < ta.size(); ++j) worst = std::max(worst, std::abs(ta[j] - tb[j]));
    }
  }
  out.require(worst < 1e-10, "theta trajectories");

  // Head updates under a fixed lambda, with another task's targets perturbed.
  bool independent = true;
  auto batch = suite.epoch_batches(1, shuffle).front();
  for (std::size_t j = 0; j < n; ++j) {
    auto perturbed = batch;
    for (auto& v : perturbed.targets[j].data()) v = 3.0 * v + 1.0;
    auto step = [&](const mtl::TaskBatch& tb) {
      auto model = suite.make_model(11);
      lossbal::EqualWeighting si(n, lossbal::Objective::ScaleInvariant);
      gradbal::MgdaAggregator mgda;
      diff::Adam opt({1e-3});
      diff::Tape tape;
      auto losses = mtl::task_losses(model, tape, tb);
      gradbal::combine_step(si, mgda, model, losses, lossbal::WeightDecision{{0.7, 1.1, 1.2}}, opt);
      std::vector<std::vector<double>> heads;
      for (std::size_t i = 0; i < n; ++i) heads.push_back(diff::flatten_values(model.task_parameters(i)));
      return heads;
    };
    const auto base = step(batch), moved = step(perturbed);
    for (std::size_t i = 0; i < n; ++i) {
      if (i != j && base[i] != moved[i]) independent = false;
    }
  }
  out.require(independent, "head independence");
  out.detail << "100 batches, worst theta difference " << worst << "; head updates bit-identical under other-task perturbation";
}

void replay_buffer(Outcome& out) {
  rl::ReplayBuffer buf(50);
  auto tagged = [](double tag) { return rl::Transition{{tag}, {1.0}, tag, {tag}}; };
  for (int i = 0; i < 50 + 17; ++i) buf.push(tagged(i));
  bool fifo = buf.size() == 50;
  for (std::size_t i = 0; i < buf.size(); ++i) fifo &= buf.at(i).reward == static_cast<double>(17 + i);
  out.require(fifo, "FIFO overwrite");

  std::mt19937_64 rng(12);
  const int draws = 100000;
  std::vector<double> counts(50, 0.0);
  for (int d = 0; d < draws; ++d) counts[buf.sample_indices(1, rng)[0]] += 1.0;
  auto pvalue = [](const std::vector<double>& c, double expected) {
    double chi2 = 0.0;
    for (double v : c) chi2 += (v - expected) * (v - expected) / expected;
    boost::math::chi_squared dist(static_cast<double>(c.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, chi2));
  };
  const double p_single = pvalue(counts, draws / 50.0);

  // Pairs from a 6-entry buffer: all 15 unordered pairs equally likely, never a repeat.
  rl::ReplayBuffer small(6);
  for (int i = 0; i < 6; ++i) small.push(tagged(i));
  std::map<std::pair<std::size_t, std::size_t>, double> pairs;
  bool distinct = true;
  for (int d = 0; d < draws; ++d) {
    auto idx = small.sample_indices(2, rng);
    distinct &= idx[0] != idx[1];
    pairs[{std::min(idx[0], idx[1]), std::max(idx[0], idx[1])}] += 1.0;
  }
  std::vector<double> pc;
  for (const auto& [k, v] : pairs) pc.push_back(v);
  const double p_pairs = pairs.size() == 15 ? pvalue(pc, draws / 15.0) : 0.0;
  out.require(distinct, "sampling without replacement");
  out.require(p_single > 0.001, "uniform single draws");
  out.require(p_pairs > 0.001, "uniform pairs");
  out.detail << "FIFO exact; chi-square p = " << p_single << " (10^5 single draws), " << p_pairs << " (10^5 pairs)";
}

bench::ExperimentConfig end_to_end_config(std::size_t seeds) {
  bench::ExperimentConfig cfg;
  cfg.name = "acceptance";
  cfg.seeds.resize(seeds);
  std::iota(cfg.seeds.begin(), cfg.seeds.end(), 1);
  for (const char* m : {"EW", "SI", "IGBv1", "IGBv2", "IGBv1+MGDA", "IGBv1+PCGrad"}) {
    cfg.sweep.push_back(bench::parse_method(m));
  }
  return cfg;
}

struct EndToEnd {
  bench::MetricReport report;
  double cpu_seconds = 0.0;
  std::size_t seeds = 0;
};

EndToEnd run_end_to_end(std::size_t seeds, const std::string& out_dir) {
  auto cfg = end_to_end_config(seeds);
  bench::SweepOptions opts;
  opts.write_files = !out_dir.empty();
  if (!out_dir.empty()) opts.out_dir = out_dir;
  opts.progress = [](const std::string& line) { std::cerr << "  " << line << "\n"; };
  const double cpu0 = process_cpu_seconds();
  auto result = bench::run_sweep(cfg, opts);
  return {result.report, process_cpu_seconds() - cpu0, seeds};
}

double mean_delta(const bench::MetricReport& r, const std::string& label) {
  const auto* row = r.find(label);
  return row && row->delta_m_summary ? row->delta_m_summary->mean : std::numeric_limits<double>::quiet_NaN();
}

double mean_T(const bench::MetricReport& r, const std::string& label) {
  const auto* row = r.find(label);
  return row && row->T_summary ? row->T_summary->mean : std::numeric_limits<double>::quiet_NaN();
}

void directional_claim(Outcome& out, const EndToEnd& e2e) {
  const auto& r = e2e.report;
  const double ew = mean_delta(r, "EW"), si = mean_delta(r, "SI"), v1 = mean_delta(r, "IGBv1"),
               v2 = mean_delta(r, "IGBv2");
  out.require(e2e.seeds >= 5, "at least 5 seeds");
  out.require(si < ew, "SI below EW");
  out.require(v1 < si, "IGBv1 below SI");
  out.require(v2 <= v1 + 0.5, "IGBv2 within 0.5 of IGBv1");
  out.require(e2e.cpu_seconds < 1800.0, "runtime");
  out.detail << std::fixed << std::setprecision(2) << e2e.seeds << " seeds, mean delta_m %: EW " << ew << ", SI " << si
             << ", IGBv1 " << v1 << ", IGBv2 " << v2 << "; sweep CPU " << std::setprecision(0) << e2e.cpu_seconds
             << " s";
}

void efficiency_claim(Outcome& out, const EndToEnd& e2e) {
  const auto& r = e2e.report;
  const double t1 = mean_T(r, "IGBv1"), t2 = mean_T(r, "IGBv2");
  out.require(t1 < 1.05, "T(IGBv1)");
  out.require(t2 < 1.25, "T(IGBv2)");
  out.detail << std::fixed << std::setprecision(3) << "T: IGBv1 " << t1 << ", IGBv2 " << t2;
  for (const auto& row : r.rows) {
    if (row.label.find("MGDA") == std::string::npos && row.label.find("PCGrad") == std::string::npos) continue;
    const double t = mean_T(r, row.label);
    out.require(t > 1.5, "T(" + row.label + ")");
    out.detail << ", " << row.label << " " << t;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> selected;
  std::size_t seeds = 10;
  std::string out_dir;
  app.add_option("--criteria", selected, "Criteria to run (default: all)")->delimiter(',');
  app.add_option("--seeds", seeds, "Seeds for the end-to-end criteria");
  app.add_option("--out", out_dir, "Directory for the end-to-end sweep records");
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<std::string, std::function<void(Outcome&)>>> unit_criteria{
      {1, {"gradient correctness", gradient_correctness}},
      {2, {"scale invariance", scale_invariance}},
      {3, {"IGBv1 contract", igbv1_contract}},
      {4, {"MGDA oracle equivalence", mgda_oracle}},
      {5, {"PCGrad properties", pcgrad_properties}},
      {6, {"reward contract", reward_contract}},
      {7, {"SAC sanity", sac_sanity}},
      {8, {"IGBv2 trace fidelity", trace_fidelity}},
      {9, {"combination equivalence", combination_equivalence}},
      {12, {"replay buffer", replay_buffer}},
  };
  if (selected.empty()) selected = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12};
  std::sort(selected.begin(), selected.end());

  std::optional<EndToEnd> e2e;
  int failures = 0;
  for (int id : selected) {
    Outcome out;
    std::string name;
    try {
      if (auto it = unit_criteria.find(id); it != unit_criteria.end()) {
        name = it->second.first;
        it->second.second(out);
      } else if (id == 10 || id == 11) {
        name = id == 10 ? "end-to-end directional claim" : "efficiency claim";
        if (!e2e) e2e = run_end_to_end(seeds, out_dir);
        if (id == 10) {
          directional_claim(out, *e2e);
        } else {
          efficiency_claim(out, *e2e);
        }
      } else {
        std::cerr << "unknown criterion " << id << "\n";
        return 2;
      }
    } catch (const std::exception& ex) {
      out.pass = false;
      out.detail << "exception: " << ex.what();
    }
    failures += !out.pass;
    std::cout << (out.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << out.detail.str()
              << std::endl;
  }
  if (e2e) std::cout << "\n" << bench::format_table(e2e->report);
  return failures == 0 ? 0 : 1;
}
