// Copyright 2026 The factrule Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <numbers>
#include <random>

#include "factrule/errors.h"
#include "factrule/gradcheck.h"
#include "factrule/model.h"
#include "factrule/optimizer.h"
#include "factrule/param_store.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace factrule {
namespace {

using testing::SmallConfig;

TEST(ParamStoreTest, GradShapeMatchesValueAndZeroes) {
  ParamStore store;
  store.Add("a", {2, 3});
  store.Add("b", {4});
  for (auto& g : store.groups()) {
    EXPECT_EQ(g.grad.size(), g.value.size());
    std::fill(g.grad.begin(), g.grad.end(), 3.0);
  }
  store.ZeroGrads();
  for (const auto& g : store.groups()) {
    for (double x : g.grad) EXPECT_EQ(x, 0.0);
  }
  EXPECT_EQ(store.TotalSize(), 10u);
  EXPECT_THROW(store.Add("a", {1}), ConfigError);
  EXPECT_THROW(store.Get("missing"), ConfigError);
}

TEST(LrScheduleTest, WarmupThenCosine) {
  LrSchedule s{1e-4, 5, 100};
  EXPECT_EQ(s.At(0), 0.0);
  EXPECT_NEAR(s.At(2.5), 0.5e-4, 1e-18);
  EXPECT_NEAR(s.At(5), 1e-4, 1e-18);
  // Midpoint of the cosine phase.
  EXPECT_NEAR(s.At(52.5), 1e-4 * (1 + std::cos(std::numbers::pi / 2)) / 2,
              1e-18);
  EXPECT_NEAR(s.At(52.5), 0.5e-4, 1e-15);
  EXPECT_NEAR(s.At(100), 0.0, 1e-20);
  for (double e = 0; e <= 100; e += 0.25) EXPECT_GE(s.At(e), 0.0);
}

ParamStore TwoGroupStore() {
  ParamStore store;
  auto& a = store.Add("a", {3});
  a.value = {1.0, -2.0, 0.5};
  auto& b = store.Add("b", {2});
  b.value = {4.0, -0.25};
  return store;
}

TEST(AdamWTest, ZeroGradZeroDecayIsFixedPoint) {
  ParamStore store = TwoGroupStore();
  ParamStore before = store;
  AdamWConfig cfg;
  cfg.weight_decay = 0.0;
  AdamW opt(store, cfg, LrSchedule{1e-2, 0, 10}, 1);
  for (int i = 0; i < 5; ++i) opt.Step(store);
  for (std::size_t g = 0; g < 2; ++g) {
    EXPECT_EQ(store.groups()[g].value, before.groups()[g].value);
  }
  EXPECT_EQ(opt.step(), 5);
}

TEST(AdamWTest, ZeroGradDecayShrinksByClosedForm) {
  ParamStore store = TwoGroupStore();
  ParamStore before = store;
  AdamW opt(store, AdamWConfig{}, LrSchedule{1e-2, 0, 10}, 1);
  const double lr = opt.NextLr();
  opt.Step(store);
  for (std::size_t g = 0; g < 2; ++g) {
    for (std::size_t i = 0; i < store.groups()[g].size(); ++i) {
      EXPECT_DOUBLE_EQ(store.groups()[g].value[i],
                       before.groups()[g].value[i] * (1 - lr * 0.05));
    }
  }
}

TEST(AdamWTest, FrozenGroupsUntouchedAndNonFiniteRejected) {
  ParamStore store = TwoGroupStore();
  for (auto& g : store.groups()) std::fill(g.grad.begin(), g.grad.end(), 1.0);
  ParamStore before = store;
  AdamW opt(store, AdamWConfig{}, LrSchedule{1e-2, 0, 10}, 1);
  opt.Step(store, {"a"});
  EXPECT_NE(store.Get("a").value, before.Get("a").value);
  EXPECT_EQ(store.Get("b").value, before.Get("b").value);
  store.Get("b").grad[1] = std::nan("");
  try {
    opt.Step(store);
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.tensor(), "b");
  }
}

struct TinyData {
  std::vector<std::vector<ViewObservation>> views;
  std::vector<std::vector<std::uint8_t>> facts;
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<int> labels;

  std::vector<LabeledSample> Batch() const {
    std::vector<LabeledSample> b;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      b.push_back({views[i], facts[i], masks[i], labels[i]});
    }
    return b;
  }
};

TinyData RandomData(const LogicModel& model, std::size_t count,
                    std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  TinyData d;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<ViewObservation> v(2);
    for (auto& o : v) {
      o.features.resize(model.config().feature_dim);
      for (double& x : o.features) x = normal(rng);
    }
    d.views.push_back(v);
    d.facts.emplace_back(model.num_facts(), 1);
    d.masks.emplace_back(model.num_facts(), 1);
    d.labels.push_back(static_cast<int>(i % model.num_classes()));
  }
  return d;
}

TEST(ForwardBackwardTest, UniformPosteriorGivesLogC) {
  LogicModel model(SmallConfig(5, 2, 2, 4));
  model.Initialize(3);
  std::fill(model.params().Get(kRuleWeight).value.begin(),
            model.params().Get(kRuleWeight).value.end(), 0.0);
  TinyData data = RandomData(model, 4, 1);
  LossConfig loss;
  loss.fact_weight = 0.0;
  auto batch = data.Batch();
  LossComponents out = ForwardBackward(model, batch, loss, StepOptions{});
  EXPECT_NEAR(out.classification, std::log(4.0), 1e-12);
  EXPECT_NEAR(out.total, std::log(4.0), 1e-12);
}

TEST(ForwardBackwardTest, PerfectPredictionHasZeroLossAndGradient) {
  LogicModel model(SmallConfig(5, 2, 2, 2));
  model.Initialize(4);
  std::fill(model.params().Get(kRuleWeight).value.begin(),
            model.params().Get(kRuleWeight).value.end(), 0.0);
  model.params().Get(kClassBias).value = {1000.0, 0.0};
  TinyData data = RandomData(model, 1, 2);
  data.labels = {0};
  LossConfig loss;
  loss.fact_weight = 0.0;
  auto batch = data.Batch();
  LossComponents out = ForwardBackward(model, batch, loss, StepOptions{});
  EXPECT_EQ(out.total, 0.0);
  for (const auto& g : model.params().groups()) {
    for (double x : g.grad) EXPECT_EQ(x, 0.0) << g.name;
  }
}

TEST(ForwardBackwardTest, ErrorsOnBadInput) {
  LogicModel model(SmallConfig(3, 2, 2, 2));
  model.Initialize(5);
  TinyData data = RandomData(model, 2, 3);
  auto batch = data.Batch();
  EXPECT_THROW(ForwardBackward(model, {}, LossConfig{}, StepOptions{}),
               ConfigError);
  batch[0].label = 7;
  EXPECT_THROW(ForwardBackward(model, batch, LossConfig{}, StepOptions{}),
               ConfigError);
  batch[0].label = 0;
  data.views[1][0].features.push_back(1.0);
  batch = data.Batch();
  EXPECT_THROW(ForwardBackward(model, batch, LossConfig{}, StepOptions{}),
               ConfigError);
  data = RandomData(model, 2, 3);
  data.views[0][0].features[0] = std::nan("");
  batch = data.Batch();
  try {
    ForwardBackward(model, batch, LossConfig{}, StepOptions{});
    FAIL() << "expected NumericalError";
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.tensor(), "confidence");
  }
}

TEST(ForwardBackwardTest, DeterministicGivenSeed) {
  GradCheckProblem p = RandomGradCheckProblem(17);
  auto batch = p.Batch();
  const double a = ForwardBackward(p.model, batch, p.loss, p.step).total;
  const auto grads = p.model.params().groups();
  const double b = ForwardBackward(p.model, batch, p.loss, p.step).total;
  EXPECT_EQ(a, b);
  for (std::size_t g = 0; g < grads.size(); ++g) {
    EXPECT_EQ(grads[g].grad, p.model.params().groups()[g].grad);
  }
}

TEST(FiniteDiffTest, ToyModelPasses) {
  LogicModel model(SmallConfig(5, 2, 2, 2));
  InitOptions init;
  init.selection_scale = 1.0;
  init.rule_weight_scale = 1.0;
  model.Initialize(11, init);
  for (double& x : model.params().Get(kNegation).value) x = 0.7;
  TinyData data = RandomData(model, 3, 5);
  auto batch = data.Batch();
  LossConfig loss;
  loss.sparsity_weight = 0.01;
  StepOptions step;
  step.selection.mode = SelectionMode::kSampled;
  step.seed = 99;
  GradCheckReport r = FiniteDiffCheck(model, batch, loss, step, 1e-5, 1e-4);
  EXPECT_TRUE(r.passed);
  EXPECT_LT(r.worst(), 1e-4);
}

TEST(FiniteDiffTest, ConstantLossHasZeroError) {
  LogicModel model(SmallConfig(4, 2, 2, 3));
  model.Initialize(12);
  TinyData data = RandomData(model, 2, 6);
  auto batch = data.Batch();
  LossConfig loss;
  loss.classification_weight = 0.0;
  loss.fact_weight = 0.0;
  loss.sparsity_weight = 0.0;
  GradCheckReport r =
      FiniteDiffCheck(model, batch, loss, StepOptions{}, 1e-5, 1e-4);
  EXPECT_TRUE(r.passed);
  for (const auto& g : r.groups) {
    EXPECT_EQ(g.max_abs_diff, 0.0);
    EXPECT_EQ(g.max_numeric, 0.0);
  }
}

TEST(FiniteDiffTest, CorruptedSelectionGradientFailsOnlyThatGroup) {
  GradCheckProblem p = RandomGradCheckProblem(5);
  auto batch = p.Batch();
  auto numeric = NumericGradients(p.model, batch, p.loss, p.step, 1e-5);
  ForwardBackward(p.model, batch, p.loss, p.step);
  for (double& g : p.model.params().Get(kSelection).grad) g = -g;
  GradCheckReport r = CompareGradients(p.model.params(), numeric, 1e-4);
  EXPECT_FALSE(r.passed);
  for (const auto& g : r.groups) {
    EXPECT_EQ(g.passed, g.group != kSelection) << g.group;
  }
}

TEST(FiniteDiffTest, HundredRandomConfigurations) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    GradCheckProblem p = RandomGradCheckProblem(seed);
    auto batch = p.Batch();
    GradCheckReport r =
        FiniteDiffCheck(p.model, batch, p.loss, p.step, 1e-5, 1e-4);
    ASSERT_TRUE(r.passed) << "seed " << seed << " worst " << r.worst();
  }
}

TEST(LinearityProbeTest, JointScalingPreservesArgmax) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif;
  for (int trial = 0; trial < 200; ++trial) {
    LogicModel model(SmallConfig(6, 4, 3, 4));
    InitOptions init;
    init.rule_weight_scale = 2.0;
    model.Initialize(trial, init);
    for (double& b : model.params().Get(kClassBias).value) b = unif(rng) - 0.5;
    std::vector<double> c(6);
    for (double& x : c) x = unif(rng);
    const auto before = model.InferFromFacts(c).predicted();
    const double k = 0.1 + 5 * unif(rng);
    for (double& w : model.params().Get(kRuleWeight).value) w *= k;
    for (double& b : model.params().Get(kClassBias).value) b *= k;
    EXPECT_EQ(model.InferFromFacts(c).predicted(), before);
  }
}

}  // namespace
}  // namespace factrule
