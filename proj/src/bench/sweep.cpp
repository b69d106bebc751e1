#include "igb/bench/sweep.hpp"

#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "igb/bench/train.hpp"

namespace igb::bench {

std::vector<MethodSpec> sweep_methods(const ExperimentConfig& config) {
  std::vector<MethodSpec> methods = config.sweep.empty() ? std::vector<MethodSpec>{config.method} : config.sweep;
  const MethodSpec ew;
  if (std::find(methods.begin(), methods.end(), ew) == methods.end()) methods.insert(methods.begin(), ew);
  return methods;
}

std::vector<RunRecord> run_seed(const ExperimentConfig& config, const std::vector<MethodSpec>& methods,
                                std::uint64_t seed) {
  mtl::SyntheticSuite suite(config.suite, derive_seeds(seed).suite);
  std::vector<RunRecord> out;
  const auto stl = train_stl(config, suite, seed, &out);
  for (const auto& m : methods) out.push_back(train_method(config, suite, m, seed, &stl));
  return out;
}

SweepResult run_sweep(const ExperimentConfig& config, const SweepOptions& options) {
  config.validate();
  const auto methods = sweep_methods(config);
  std::vector<std::vector<RunRecord>> per_seed(config.seeds.size());
  std::vector<std::exception_ptr> errors(config.seeds.size());
  std::mutex log_mutex;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < config.seeds.size(); i = next++) {
      try {
        per_seed[i] = run_seed(config, methods, config.seeds[i]);
        if (options.progress) {
          std::lock_guard lock(log_mutex);
          for (const auto& r : per_seed[i]) {
            options.progress(r.method + " seed " + std::to_string(r.seed) +
                             (r.aborted ? " aborted: " + r.abort_reason : " done"));
          }
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(config.jobs, config.seeds.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  SweepResult result;
  for (auto& v : per_seed) {
    for (auto& r : v) result.records.push_back(std::move(r));
  }
  std::vector<std::string> order;
  for (const auto& m : methods) order.push_back(m.label());
  if (options.write_files) {
    result.out_dir = options.out_dir.value_or(resolve_output_dir(config));
    for (const auto& r : result.records) save_record(r, result.out_dir / "runs" / record_file_name(r.method, r.seed));
    result.report = write_report(result.out_dir, result.records, order);
  } else {
    result.report = summarize(result.records, order);
  }
  return result;
}

}  // namespace igb::bench
