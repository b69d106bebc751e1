#include "igb/bench/train.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <memory>
#include <sstream>

#include "igb/bench/metrics.hpp"
#include "igb/diff/layers.hpp"
#include "igb/errors.hpp"
#include "igb/gradbal/combine.hpp"
#include "igb/lossbal/update.hpp"
#include "igb/mtl/evaluate.hpp"
#include "igb/rl/controller.hpp"

namespace igb::bench {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::unique_ptr<lossbal::LossBalancer> make_balancer(const ExperimentConfig& config, const MethodSpec& method,
                                                     std::size_t tasks, std::uint64_t seed) {
  const auto objective = method.effective_objective();
  if (method.strategy == lossbal::StrategyKind::IGBv2) {
    return std::make_unique<rl::Igbv2Strategy>(tasks, config.igbv2, seed, objective);
  }
  return lossbal::make_loss_balancer(method.strategy, tasks, {objective, seed});
}

void restore(const std::vector<diff::Tensor*>& params, const std::vector<double>& flat) {
  std::size_t at = 0;
  for (auto* p : params) {
    for (auto& v : p->data()) v = flat[at++];
  }
}

// Lower is better.
double selection_score(const mtl::TaskMetrics& val, const std::vector<double>& reference) {
  return compute_delta_m(val.values, reference, val.higher_is_better);
}

}  // namespace

RunSeeds derive_seeds(std::uint64_t seed) {
  std::uint64_t s = seed;
  RunSeeds out{};
  out.suite = splitmix64(s);
  out.model = splitmix64(s);
  out.strategy = splitmix64(s);
  out.aggregator = splitmix64(s);
  out.shuffle = splitmix64(s);
  return out;
}

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

std::string stl_label(std::size_t task) { return "STL-task" + std::to_string(task); }

RunRecord train_method(const ExperimentConfig& config, const mtl::SyntheticSuite& suite, const MethodSpec& method,
                       std::uint64_t seed, const StlReference* stl) {
  const std::size_t n = suite.task_count();
  const RunSeeds seeds = derive_seeds(seed);
  if (stl && stl->validation.size() != n) throw ContractError("train: single-task reference has the wrong task count");

  auto model = suite.make_model(seeds.model);
  auto balancer = make_balancer(config, method, n, seeds.strategy);
  std::unique_ptr<gradbal::GradAggregator> aggregator;
  if (method.aggregator) aggregator = gradbal::make_aggregator(*method.aggregator, seeds.aggregator);
  auto* igbv2 = dynamic_cast<rl::Igbv2Strategy*>(balancer.get());

  diff::Adam optimizer({config.lr.initial_lr});
  std::mt19937_64 shuffle(seeds.shuffle);
  const auto params = model.parameters();

  RunRecord rec;
  rec.method = method.label();
  rec.seed = seed;
  rec.tasks = n;
  for (const auto& h : suite.head_specs()) rec.higher_is_better.push_back(h.kind == mtl::TaskKind::Classification);

  const std::size_t bpe = suite.batches_per_epoch();
  const auto wall_start = std::chrono::steady_clock::now();
  std::size_t global = 0;
  std::optional<double> best_score;
  std::vector<double> best_params;
  std::vector<double> reference;  // validation metrics the selection score compares against
  if (stl) reference = stl->validation;

  for (std::size_t epoch = 1; epoch <= config.epochs && !rec.aborted; ++epoch) {
    const double lr = config.lr.lr(epoch);
    optimizer.set_lr(lr);
    auto batches = suite.epoch_batches(epoch, shuffle);
    std::vector<double> loss_sum(n, 0.0);
    const double cpu_start = thread_cpu_seconds();

    for (std::size_t b = 1; b <= batches.size(); ++b) {
      ++global;
      diff::Tape tape;
      auto losses = mtl::task_losses(model, tape, batches[b - 1]);
      rec.clamped_losses += losses.clamped;
      for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(losses.values[i])) {
          std::ostringstream why;
          why << "non-finite loss " << losses.values[i] << " for task " << i + 1 << " at epoch " << epoch
              << " batch " << b;
          rec.aborted = true;
          rec.abort_reason = why.str();
        }
      }
      if (rec.aborted) {
        rec.batches.push_back({epoch, b, losses.values, {}, std::nullopt});
        break;
      }
      lossbal::BatchContext ctx{epoch, b, bpe, global, lr, config.lr.initial_lr};
      auto w = balancer->weights(losses, ctx);
      if (aggregator) {
        gradbal::combine_step(*balancer, *aggregator, model, losses, w, optimizer);
      } else {
        lossbal::loss_balance_step(*balancer, model, losses, w, optimizer);
      }
      balancer->end_batch(losses, ctx);
      rec.backward_passes += tape.backward_count();

      BatchRow row{epoch, b, losses.values, w.lambda, std::nullopt};
      if (igbv2) row.reward = igbv2->last_step().reward;
      for (std::size_t i = 0; i < n; ++i) loss_sum[i] += losses.values[i];
      rec.batches.push_back(std::move(row));
    }
    if (rec.aborted) {
      rec.train_seconds += thread_cpu_seconds() - cpu_start;
      break;
    }
    balancer->end_epoch(epoch);
    rec.train_seconds += thread_cpu_seconds() - cpu_start;

    const auto val = mtl::evaluate(model, suite.validation());
    if (reference.empty()) reference = val.values;
    EpochRow row;
    row.epoch = epoch;
    for (double s : loss_sum) row.train_losses.push_back(s / static_cast<double>(batches.size()));
    row.val_losses = val.losses;
    row.val_metrics = val.values;
    row.lr = lr;
    if (stl) row.val_delta_m = compute_delta_m(val.values, stl->validation, val.higher_is_better);
    row.train_seconds = rec.train_seconds;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
    rec.epochs.push_back(std::move(row));

    const double score = selection_score(val, reference);
    if (!best_score || score < *best_score) {
      best_score = score;
      rec.selected_epoch = epoch;
      best_params = diff::flatten_values(params);
    }
  }

  if (!best_params.empty()) {
    restore(params, best_params);
    const auto test = mtl::evaluate(model, suite.test());
    rec.test_metrics = test.values;
    rec.test_losses = test.losses;
    if (stl) rec.test_delta_m = compute_delta_m(test.values, stl->test, test.higher_is_better);
  }
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return rec;
}

RunRecord train_run(const ExperimentConfig& config, std::uint64_t seed, const StlReference* stl) {
  mtl::SyntheticSuite suite(config.suite, derive_seeds(seed).suite);
  return train_method(config, suite, config.method, seed, stl);
}

StlReference train_stl(const ExperimentConfig& config, const mtl::SyntheticSuite& suite, std::uint64_t seed,
                       std::vector<RunRecord>* records) {
  StlReference ref;
  MethodSpec ew;
  for (std::size_t k = 0; k < suite.task_count(); ++k) {
    auto single = suite.single_task(k);
    auto rec = train_method(config, single, ew, seed);
    rec.method = stl_label(k + 1);
    if (rec.aborted) throw StateError("single-task run " + rec.method + " aborted: " + rec.abort_reason);
    const auto& sel = rec.epochs.at(rec.selected_epoch - 1);
    ref.validation.push_back(sel.val_metrics.at(0));
    ref.test.push_back(rec.test_metrics.at(0));
    ref.higher_is_better.push_back(rec.higher_is_better.at(0));
    ref.train_seconds += rec.train_seconds;
    if (records) records->push_back(std::move(rec));
  }
  return ref;
}

}  // namespace igb::bench
