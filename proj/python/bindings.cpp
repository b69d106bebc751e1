#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "igb/bench/config.hpp"
#include "igb/bench/metrics.hpp"
#include "igb/bench/report.hpp"
#include "igb/bench/selftest.hpp"
#include "igb/bench/sweep.hpp"
#include "igb/bench/train.hpp"
#include "igb/errors.hpp"
#include "igb/gradbal/aggregators.hpp"
#include "igb/lossbal/weights.hpp"
#include "igb/rl/replay_buffer.hpp"
#include "igb/rl/reward.hpp"

namespace py = pybind11;
using namespace igb;

namespace {

lossbal::BaselineLosses baseline_of(const std::optional<std::vector<double>>& base) {
  lossbal::BaselineLosses out;
  if (base) {
    std::vector<std::vector<double>> epoch{*base};
    out.capture(epoch, 2);
  }
  return out;
}

py::dict record_dict(const bench::RunRecord& r) {
  py::dict d;
  d["method"] = r.method;
  d["seed"] = r.seed;
  d["selected_epoch"] = r.selected_epoch;
  d["test_metrics"] = r.test_metrics;
  d["test_losses"] = r.test_losses;
  d["test_delta_m"] = r.test_delta_m;
  d["train_seconds"] = r.train_seconds;
  d["backward_passes"] = r.backward_passes;
  d["aborted"] = r.aborted;
  py::list weights, losses;
  for (const auto& b : r.batches) {
    weights.append(b.weights);
    losses.append(b.losses);
  }
  d["batch_weights"] = weights;
  d["batch_losses"] = losses;
  return d;
}

}  // namespace

PYBIND11_MODULE(_igb, m) {
  m.doc() = "Multi-task loss and gradient balancing";

  auto base_err = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ShapeError>(m, "ShapeError", base_err.ptr());
  py::register_exception<ContractError>(m, "ContractError", base_err.ptr());
  py::register_exception<DomainError>(m, "DomainError", base_err.ptr());
  py::register_exception<StateError>(m, "StateError", base_err.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base_err.ptr());

  m.def("scaled_softmax", [](const std::vector<double>& z) { return lossbal::scaled_softmax(z).lambda; },
        py::arg("z"), "n * softmax(z).");
  m.def(
      "igbv1_weights",
      [](const std::vector<double>& losses, std::optional<std::vector<double>> base, std::size_t epoch) {
        return lossbal::igbv1_weights(losses, baseline_of(base), epoch).lambda;
      },
      py::arg("losses"), py::arg("base") = py::none(), py::arg("epoch") = 3,
      "All ones for epochs 1-2, then n * softmax(losses / base).");
  m.def(
      "dwa_weights",
      [](const std::vector<double>& older, const std::vector<double>& newer, double temperature) {
        lossbal::LossHistory h;
        h.push_epoch(older);
        h.push_epoch(newer);
        return lossbal::dwa_weights(h, older.size(), temperature).lambda;
      },
      py::arg("older"), py::arg("newer"), py::arg("temperature") = lossbal::kDwaTemperature);

  m.def(
      "min_norm",
      [](const std::vector<std::vector<double>>& grads) {
        const auto r = gradbal::mgda_aggregate({grads});
        return py::make_tuple(r.direction, r.weights.gamma);
      },
      py::arg("grads"), "Min-norm point of the convex hull: (direction, gamma).");
  m.def(
      "pcgrad",
      [](const std::vector<std::vector<double>>& grads, std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        return gradbal::pcgrad_aggregate({grads}, rng);
      },
      py::arg("grads"), py::arg("seed") = 0);
  m.def("mean_aggregate", [](const std::vector<std::vector<double>>& grads) { return gradbal::mean_aggregate({grads}); },
        py::arg("grads"));

  m.def(
      "compute_reward",
      [](const std::vector<double>& l_t, const std::vector<double>& l_next, const std::vector<double>& base,
         double lr_now, double lr_init, bool use_min, bool use_alpha) {
        return rl::compute_reward(l_t, l_next, baseline_of(base), lr_now, lr_init, {use_min, use_alpha});
      },
      py::arg("l_t"), py::arg("l_next"), py::arg("base"), py::arg("lr_now") = 1e-3, py::arg("lr_init") = 1e-3,
      py::arg("use_min") = true, py::arg("use_alpha") = true);

  py::class_<rl::ReplayBuffer>(m, "ReplayBuffer")
      .def(py::init<std::size_t>(), py::arg("capacity") = 10000)
      .def("push",
           [](rl::ReplayBuffer& b, std::vector<double> s, std::vector<double> a, double r, std::vector<double> s2) {
             b.push(rl::Transition{std::move(s), std::move(a), r, std::move(s2)});
           })
      .def("__len__", &rl::ReplayBuffer::size)
      .def_property_readonly("capacity", &rl::ReplayBuffer::capacity)
      .def("rewards",
           [](const rl::ReplayBuffer& b) {
             std::vector<double> out;
             for (const auto& t : b.contents()) out.push_back(t.reward);
             return out;
           })
      .def(
          "sample_indices",
          [](const rl::ReplayBuffer& b, std::size_t count, std::uint64_t seed) {
            std::mt19937_64 rng(seed);
            return b.sample_indices(count, rng);
          },
          py::arg("count"), py::arg("seed") = 0);

  m.def(
      "compute_delta_m",
      [](const std::vector<double>& method, const std::vector<double>& baseline, std::vector<bool> higher) {
        if (higher.empty()) higher.assign(method.size(), false);
        return bench::compute_delta_m(method, baseline, higher);
      },
      py::arg("method"), py::arg("baseline"), py::arg("higher_is_better") = std::vector<bool>{});
  m.def("compute_T", &bench::compute_T, py::arg("method_seconds"), py::arg("ew_seconds"));
  m.def("method_label", [](const std::string& label) { return bench::parse_method(label).label(); },
        py::arg("label"), "Canonical label of a method name such as 'IGBv1+MGDA'.");

  m.def("default_config", []() { return bench::config_to_json(bench::ExperimentConfig{}); },
        "Default experiment configuration as JSON text.");
  m.def("normalize_config", [](const std::string& text) { return bench::config_to_json(bench::parse_config(text)); },
        py::arg("config_json"));
  m.def(
      "train_run",
      [](const std::string& text, std::uint64_t seed) {
        const auto cfg = bench::parse_config(text);
        bench::RunRecord r;
        {
          py::gil_scoped_release release;
          r = bench::train_run(cfg, seed);
        }
        return record_dict(r);
      },
      py::arg("config_json"), py::arg("seed") = 1, "Trains the configured method once.");
  m.def(
      "run_sweep",
      [](const std::string& text, std::optional<std::filesystem::path> out_dir) {
        const auto cfg = bench::parse_config(text);
        bench::SweepOptions opts;
        opts.write_files = out_dir.has_value();
        opts.out_dir = out_dir;
        bench::SweepResult result;
        {
          py::gil_scoped_release release;
          result = bench::run_sweep(cfg, opts);
        }
        py::dict d;
        d["table"] = bench::format_table(result.report);
        d["summary"] = py::module_::import("json").attr("loads")(bench::report_json(result.report));
        py::list records;
        for (const auto& r : result.records) records.append(record_dict(r));
        d["records"] = records;
        return d;
      },
      py::arg("config_json"), py::arg("out_dir") = py::none(),
      "Runs every method of the config's sweep over its seeds; writes files only when out_dir is given.");
  m.def("selftest", []() {
    std::vector<std::tuple<std::string, bool, std::string>> out;
    for (const auto& r : bench::run_selftest()) out.emplace_back(r.name, r.passed, r.detail);
    return out;
  });
}
