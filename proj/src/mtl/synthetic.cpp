#include "igb/mtl/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "igb/errors.hpp"

namespace igb::mtl {

double hermite_normalized(unsigned degree, double z) {
  double prev = 1.0, cur = z;
  if (degree == 0) return prev;
  double norm = 1.0;
  for (unsigned d = 1; d < degree; ++d) {
    const double next = z * cur - static_cast<double>(d) * prev;
    prev = cur;
    cur = next;
    norm *= static_cast<double>(d + 1);
  }
  return cur / std::sqrt(norm);
}

void SuiteConfig::validate() const {
  if (tasks.size() < 2) {
    throw ConfigError("suite needs at least 2 tasks, got " + std::to_string(tasks.size()));
  }
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const auto& t = tasks[k];
    if (!(t.scale > 0.0)) throw ConfigError("task " + std::to_string(k + 1) + ": scale must be positive");
    if (t.degree == 0) throw ConfigError("task " + std::to_string(k + 1) + ": degree must be at least 1");
    if (!(t.noise >= 0.0)) throw ConfigError("task " + std::to_string(k + 1) + ": noise must be non-negative");
    if (t.kind == TaskKind::Classification && t.classes < 2) {
      throw ConfigError("task " + std::to_string(k + 1) + ": classification needs at least 2 classes");
    }
  }
  if (input_dim == 0 || feature_dim == 0 || components == 0) throw ConfigError("suite dimensions must be positive");
  if (samples < 20) throw ConfigError("suite needs at least 20 samples");
  if (batch_size == 0) throw ConfigError("batch_size must be positive");
}

SuiteConfig SuiteConfig::scaled_default() {
  SuiteConfig c;
  c.tasks = {
      TaskSpec{1.0, 3, 0.1},
      TaskSpec{10.0, 2, 0.1},
      TaskSpec{100.0, 1, 0.1},
  };
  return c;
}

namespace {

struct TaskFunction {
  std::vector<std::vector<double>> directions;  // per output: components x feature_dim
  std::vector<std::vector<double>> weights;     // per output: components
};

Split make_split(const SuiteConfig& cfg, const std::vector<double>& mixing, const std::vector<TaskFunction>& fns,
                 std::size_t rows, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto d = cfg.input_dim, f = cfg.feature_dim;
  std::vector<double> x(rows * d);
  for (auto& v : x) v = normal(rng);

  Split split;
  split.inputs = Tensor({rows, d}, x);
  std::vector<double> h(f);
  std::vector<std::vector<double>> targets(cfg.tasks.size(), std::vector<double>(rows));
  std::vector<std::vector<double>> clean(cfg.tasks.size(), std::vector<double>(rows));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < f; ++j) {
      double acc = 0.0;
      for (std::size_t i = 0; i < d; ++i) acc += x[r * d + i] * mixing[i * f + j];
      h[j] = acc;
    }
    for (std::size_t k = 0; k < cfg.tasks.size(); ++k) {
      const auto& spec = cfg.tasks[k];
      const auto& fn = fns[k];
      std::vector<double> scores(fn.directions.size());
      for (std::size_t o = 0; o < fn.directions.size(); ++o) {
        double s = 0.0;
        for (std::size_t c = 0; c < cfg.components; ++c) {
          double z = 0.0;
          for (std::size_t j = 0; j < f; ++j) z += fn.directions[o][c * f + j] * h[j];
          s += fn.weights[o][c] * hermite_normalized(spec.degree, z);
        }
        scores[o] = s / std::sqrt(static_cast<double>(cfg.components));
      }
      const double eps = normal(rng);
      if (spec.kind == TaskKind::Regression) {
        clean[k][r] = spec.scale * scores[0];
        targets[k][r] = clean[k][r] + spec.scale * spec.noise * eps;
      } else {
        std::size_t best = 0;
        for (std::size_t o = 0; o < scores.size(); ++o) {
          scores[o] += spec.noise * normal(rng);
          if (scores[o] > scores[best]) best = o;
        }
        clean[k][r] = scores[0];
        targets[k][r] = static_cast<double>(best);
      }
    }
  }
  for (std::size_t k = 0; k < cfg.tasks.size(); ++k) {
    split.targets.emplace_back(diff::Shape{rows, 1}, std::move(targets[k]));
    split.clean.emplace_back(diff::Shape{rows, 1}, std::move(clean[k]));
  }
  return split;
}

Split take_task(const Split& s, std::size_t task) {
  Split out;
  out.inputs = s.inputs;
  out.targets = {s.targets[task]};
  out.clean = {s.clean[task]};
  return out;
}

}  // namespace

SyntheticSuite::SyntheticSuite(SuiteConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed) {
  config_.validate();
  config_.model.input_dim = config_.input_dim;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const auto d = config_.input_dim, f = config_.feature_dim;
  std::vector<double> mixing(d * f);
  for (auto& v : mixing) v = normal(rng) / std::sqrt(static_cast<double>(d));

  // Function draws happen before any sample draw and never depend on scale or
  // noise, so changing a task's scale rescales its clean targets exactly.
  auto draw_directions = [&] {
    std::vector<double> dirs(config_.components * f);
    for (std::size_t c = 0; c < config_.components; ++c) {
      double norm = 0.0;
      for (std::size_t j = 0; j < f; ++j) norm += std::pow(dirs[c * f + j] = normal(rng), 2);
      norm = std::sqrt(norm);
      for (std::size_t j = 0; j < f; ++j) dirs[c * f + j] /= norm;
    }
    return dirs;
  };
  std::vector<double> shared;
  if (config_.shared_directions) shared = draw_directions();

  std::vector<TaskFunction> fns;
  for (const auto& spec : config_.tasks) {
    const std::size_t outputs = spec.kind == TaskKind::Classification ? spec.classes : 1;
    TaskFunction fn;
    for (std::size_t o = 0; o < outputs; ++o) {
      std::vector<double> dirs = config_.shared_directions ? shared : draw_directions();
      std::vector<double> w(config_.components);
      for (auto& v : w) v = normal(rng);
      fn.directions.push_back(std::move(dirs));
      fn.weights.push_back(std::move(w));
    }
    fns.push_back(std::move(fn));
  }

  const std::size_t n_train = config_.samples * 70 / 100;
  const std::size_t n_val = config_.samples * 15 / 100;
  const std::size_t n_test = config_.samples - n_train - n_val;
  train_ = make_split(config_, mixing, fns, n_train, rng);
  validation_ = make_split(config_, mixing, fns, n_val, rng);
  test_ = make_split(config_, mixing, fns, n_test, rng);
}

std::vector<TaskHeadSpec> SyntheticSuite::head_specs() const {
  std::vector<TaskHeadSpec> heads;
  for (const auto& t : config_.tasks) {
    heads.push_back(t.kind == TaskKind::Regression ? TaskHeadSpec{TaskKind::Regression, 1}
                                                   : TaskHeadSpec{TaskKind::Classification, t.classes});
  }
  return heads;
}

MultiTaskModel SyntheticSuite::make_model(std::uint64_t seed) const {
  return MultiTaskModel(config_.model, head_specs(), seed);
}

std::size_t SyntheticSuite::batches_per_epoch() const {
  return (train_.rows() + config_.batch_size - 1) / config_.batch_size;
}

std::vector<TaskBatch> SyntheticSuite::epoch_batches(std::size_t epoch, std::mt19937_64& rng) const {
  const std::size_t n = train_.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  const auto d = config_.input_dim;
  std::vector<TaskBatch> batches;
  for (std::size_t start = 0, b = 1; start < n; start += config_.batch_size, ++b) {
    const std::size_t rows = std::min(config_.batch_size, n - start);
    std::vector<double> x(rows * d);
    std::vector<std::vector<double>> y(task_count(), std::vector<double>(rows));
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t src = order[start + r];
      std::copy_n(train_.inputs.data().begin() + static_cast<std::ptrdiff_t>(src * d), d, x.begin() + static_cast<std::ptrdiff_t>(r * d));
      for (std::size_t k = 0; k < task_count(); ++k) y[k][r] = train_.targets[k][src];
    }
    TaskBatch batch;
    batch.inputs = Tensor({rows, d}, std::move(x));
    for (auto& col : y) batch.targets.emplace_back(diff::Shape{rows, 1}, std::move(col));
    batch.epoch_index = epoch;
    batch.batch_index = b;
    batches.push_back(std::move(batch));
  }
  return batches;
}

SyntheticSuite SyntheticSuite::single_task(std::size_t task) const {
  if (task >= task_count()) throw ContractError("single_task: no task " + std::to_string(task));
  SyntheticSuite out;
  out.config_ = config_;
  out.config_.tasks = {config_.tasks[task]};
  out.seed_ = seed_;
  out.train_ = take_task(train_, task);
  out.validation_ = take_task(validation_, task);
  out.test_ = take_task(test_, task);
  return out;
}

}  // namespace igb::mtl
