#include <doctest.h>

#include <cmath>
#include <set>

#include "igb/diff/ops.hpp"
#include "igb/errors.hpp"
#include "igb/mtl/evaluate.hpp"
#include "igb/mtl/model.hpp"
#include "igb/mtl/synthetic.hpp"

using namespace igb;
using namespace igb::mtl;

namespace {

SuiteConfig small_suite() {
  auto c = SuiteConfig::scaled_default();
  c.samples = 400;
  c.batch_size = 32;
  return c;
}

}  // namespace

TEST_CASE("hermite polynomials are normalized") {
  const double z = 0.7;
  CHECK(hermite_normalized(0, z) == 1.0);
  CHECK(hermite_normalized(1, z) == z);
  CHECK(hermite_normalized(2, z) == doctest::Approx((z * z - 1.0) / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(hermite_normalized(3, z) == doctest::Approx((z * z * z - 3.0 * z) / std::sqrt(6.0)).epsilon(1e-14));
}

TEST_CASE("suite is deterministic in its seed and split 70/15/15") {
  SyntheticSuite a(small_suite(), 5), b(small_suite(), 5), c(small_suite(), 6);
  CHECK(a.train().inputs == b.train().inputs);
  CHECK(a.test().targets[2] == b.test().targets[2]);
  CHECK_FALSE(a.train().inputs == c.train().inputs);
  CHECK(a.train().rows() == 280);
  CHECK(a.validation().rows() == 60);
  CHECK(a.test().rows() == 60);
}

TEST_CASE("task scale multiplies clean targets exactly") {
  auto base = small_suite();
  auto scaled = base;
  scaled.tasks[0].scale = 10.0;
  SyntheticSuite a(base, 2), b(scaled, 2);
  const auto& ca = a.train().clean[0];
  const auto& cb = b.train().clean[0];
  for (std::size_t i = 0; i < ca.numel(); ++i) CHECK(cb[i] == 10.0 * ca[i]);
  CHECK(a.train().inputs == b.train().inputs);
}

TEST_CASE("target scales follow the configured scales") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SyntheticSuite s(SuiteConfig::scaled_default(), seed);
    std::vector<double> rms;
    for (const auto& t : s.train().clean) {
      double ss = 0.0;
      for (double v : t.data()) ss += v * v;
      rms.push_back(std::sqrt(ss / static_cast<double>(t.numel())));
    }
    CHECK(rms[1] > rms[0]);
    CHECK(rms[2] > rms[1]);
  }
}

TEST_CASE("epoch batches visit every training row once") {
  SyntheticSuite s(small_suite(), 3);
  std::mt19937_64 rng(1);
  auto batches = s.epoch_batches(1, rng);
  CHECK(batches.size() == s.batches_per_epoch());
  CHECK(batches.back().inputs.rows() == 280 - 8 * 32);
  std::multiset<double> seen, expected;
  for (const auto& b : batches) {
    for (double v : b.targets[0].data()) seen.insert(v);
  }
  for (double v : s.train().targets[0].data()) expected.insert(v);
  CHECK(seen == expected);
  CHECK(batches[3].batch_index == 4);
}

TEST_CASE("single-task view keeps the data of one task") {
  SyntheticSuite s(small_suite(), 3);
  auto one = s.single_task(1);
  CHECK(one.task_count() == 1);
  CHECK(one.train().targets[0] == s.train().targets[1]);
  CHECK(one.validation().inputs == s.validation().inputs);
  CHECK_THROWS_AS(s.single_task(3), ContractError);
}

TEST_CASE("model forward shapes and parameter partition") {
  MultiTaskModel m({6, {8, 8}, 4}, {{TaskKind::Regression, 1}, {TaskKind::Classification, 3}}, 1);
  Tape tape;
  auto out = m.forward(tape, Tensor({5, 6}, std::vector<double>(30, 0.1)));
  REQUIRE(out.size() == 2);
  CHECK(out[0].shape() == diff::Shape{5, 1});
  CHECK(out[1].shape() == diff::Shape{5, 3});
  const auto all = m.parameters();
  CHECK(all.size() == m.shared_parameters().size() + m.task_parameters(0).size() + m.task_parameters(1).size());
  CHECK(all.front() == m.shared_parameters().front());
}

TEST_CASE("same seed builds the same model") {
  MultiTaskModel a({6, {8}, 4}, {{}, {}}, 9), b({6, {8}, 4}, {{}, {}}, 9);
  auto pa = a.parameters(), pb = b.parameters();
  for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
}

TEST_CASE("losses are clamped at the floor and counted") {
  Tape tape;
  Var pred = tape.constant(Tensor({2, 1}, {1.0, 2.0}));
  TaskBatch batch;
  batch.inputs = Tensor({2, 1}, {0.0, 0.0});
  batch.targets = {Tensor({2, 1}, {1.0, 2.0}), Tensor({2, 1}, {0.0, 0.0})};
  std::vector<Var> preds{pred, pred};
  auto losses = task_losses(preds, batch, {{}, {}});
  CHECK(losses.clamped == 1);
  CHECK(losses.values[0] == kLossFloor);
  CHECK(losses.values[1] == doctest::Approx(2.5));
}

TEST_CASE("classification accuracy and regression MSE") {
  MultiTaskModel m({2, {4}, 3}, {{TaskKind::Classification, 2}}, 1);
  Split split;
  split.inputs = Tensor({4, 2}, {1, 0, 0, 1, 1, 1, -1, 0});
  Tape tape;
  auto logits = m.forward(tape, split.inputs)[0].value();
  std::vector<double> labels;
  for (std::size_t r = 0; r < 4; ++r) labels.push_back(logits.at(r, 1) > logits.at(r, 0) ? 1.0 : 0.0);
  labels[0] = 1.0 - labels[0];
  split.targets = {Tensor({4, 1}, labels)};
  auto metrics = evaluate(m, split);
  CHECK(metrics.values[0] == 0.75);
  CHECK(metrics.higher_is_better[0]);
}

TEST_CASE("suite config validation") {
  auto c = small_suite();
  c.tasks.resize(1);
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = small_suite();
  c.tasks[0].scale = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}
