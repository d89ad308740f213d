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
#include <vector>

#include "factrule/errors.h"
#include "factrule/logic_layer.h"
#include "factrule/loss.h"
#include "factrule/model.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace factrule {
namespace {

using testing::ClearReasoning;
using testing::SetRule;
using testing::SetWeight;
using testing::SmallConfig;

std::size_t ArgMax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

TEST(SelectLiteralTest, GumbelArgmaxFrequenciesMatchSoftmax) {
  const std::vector<double> logits = {1.0, 0.0, -0.5, 2.0};
  const auto expected = Softmax(logits);
  SelectionOptions opts{1.0, SelectionMode::kSampled, true};
  std::mt19937_64 rng(42);
  std::vector<double> counts(logits.size(), 0.0);
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    counts[ArgMax(SelectLiteral(logits, opts, &rng).forward)] += 1.0;
  }
  for (std::size_t i = 0; i < logits.size(); ++i) {
    EXPECT_NEAR(counts[i] / draws, expected[i], 0.01) << "entry " << i;
  }
}

TEST(SelectLiteralTest, SoftSelectionIsADistribution) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 5.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> logits(1 + trial % 8);
    for (double& x : logits) x = normal(rng);
    SelectionOptions opts{0.05 + (trial % 10) * 0.2, SelectionMode::kSampled,
                          trial % 2 == 0};
    const Selection s = SelectLiteral(logits, opts, &rng);
    double sum = 0.0, fwd = 0.0;
    for (std::size_t i = 0; i < s.soft.size(); ++i) {
      EXPECT_GE(s.soft[i], 0.0);
      sum += s.soft[i];
      fwd += s.forward[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-9);
    EXPECT_NEAR(fwd, 1.0, 1e-9);
  }
}

TEST(SelectLiteralTest, RejectsBadArguments) {
  const std::vector<double> logits = {0.0, 1.0};
  EXPECT_THROW(SelectLiteral(logits, {0.0, SelectionMode::kDeterministic}, nullptr),
               ConfigError);
  EXPECT_THROW(SelectLiteral(logits, {1.0, SelectionMode::kSampled}, nullptr),
               ConfigError);
}

TEST(SoftmaxTest, ReferenceExampleAndShiftInvariance) {
  // Two classes, one rule with weight [1, 0], strength 1, no bias.
  const std::vector<double> tau = {1.0}, w = {1.0, 0.0}, beta = {0.0, 0.0};
  const auto p = ClassPosterior(tau, w, beta);
  EXPECT_NEAR(p[0], 0.731059, 1e-6);
  EXPECT_NEAR(p[1], 0.268941, 1e-6);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> s(2 + trial % 5);
    for (double& x : s) x = normal(rng);
    std::vector<double> shifted = s;
    const double c = normal(rng) * 100.0;
    for (double& x : shifted) x += c;
    const auto a = Softmax(s), b = Softmax(shifted);
    for (std::size_t i = 0; i < s.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12);
  }
}

TEST(LiteralTruthTest, Examples) {
  const std::vector<double> onehot = {0.0, 1.0, 0.0};
  const std::vector<double> c = {0.2, 0.7, 0.9};
  EXPECT_DOUBLE_EQ(LiteralTruth(onehot, 0.0, c), 0.7);
  EXPECT_NEAR(LiteralTruth(onehot, 1.0, c), 0.3, 1e-15);
  const std::vector<double> mu = {0.9, 0.8};
  EXPECT_NEAR(RuleStrength(mu), 0.72, 1e-15);
}

TEST(LiteralTruthTest, BoundsOnRandomInputs) {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 4.0);
  for (int i = 0; i < 100000; ++i) {
    const std::size_t n = 1 + i % 8;
    std::vector<double> logits(n), c(n);
    for (double& x : logits) x = normal(rng);
    for (double& x : c) x = unif(rng);
    const auto gamma = Softmax(logits);
    const double eta = unif(rng);
    const double mu = LiteralTruth(gamma, eta, c);
    ASSERT_GE(mu, 0.0);
    ASSERT_LE(mu, 1.0);
    ASSERT_EQ(LiteralTruth(gamma, 0.5, c), 0.5);
    std::vector<double> truths(1 + i % 4);
    for (double& t : truths) t = unif(rng);
    const double tau = RuleStrength(truths);
    ASSERT_GE(tau, 0.0);
    ASSERT_LE(tau, 1.0);
  }
}

TEST(RuleStrengthTest, ProductTNormIdentityAndAnnihilator) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> mu(1 + i % 4);
    for (double& x : mu) x = unif(rng);
    const double base = RuleStrength(mu);
    auto with_one = mu;
    with_one.push_back(1.0);
    EXPECT_EQ(RuleStrength(with_one), base);
    auto with_zero = mu;
    with_zero.insert(with_zero.begin() + i % mu.size(), 0.0);
    EXPECT_EQ(RuleStrength(with_zero), 0.0);
    // Monotone in every argument.
    auto bigger = mu;
    bigger[0] = std::min(1.0, bigger[0] + 0.1);
    EXPECT_GE(RuleStrength(bigger), base);
  }
}

// One rule: class 1 <- A and B and not C.
LogicModel ExitRuleModel(double weight) {
  LogicModel model(SmallConfig(3, 1, 3, 2));
  model.Initialize(1);
  ClearReasoning(model);
  SetRule(model, 0, {0, 1}, {2});
  SetWeight(model, 1, 0, weight);
  model.params().Get(kClassBias).value[0] = 1.0;
  return model;
}

TEST(RuleEvaluationTest, HandBuiltRiskRule) {
  const LogicModel model = ExitRuleModel(10.0);
  const std::vector<double> c = {0.95, 0.95, 0.05};
  const Inference inf = model.InferFromFacts(c);
  EXPECT_NEAR(inf.activation.strength[0], 0.857375, 1e-6);
  EXPECT_GT(inf.activation.posterior[1], 0.9);
  EXPECT_EQ(inf.predicted(), 1u);

  const std::vector<double> off = {0.95, 0.95, 0.95};
  EXPECT_EQ(model.InferFromFacts(off).predicted(), 0u);
}

TEST(RuleEvaluationTest, StrengthIsProductOfTruthsAndBounded) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LogicModel model(SmallConfig(6, 4, 3, 3));
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    model.Initialize(seed);
    for (double& g : model.params().Get(kNegation).value) g = unif(rng) * 4 - 2;
    std::vector<double> c(6);
    for (double& x : c) x = unif(rng);
    const Inference inf = model.InferFromFacts(c);
    const auto d = model.dims();
    for (std::size_t m = 0; m < d.num_rules; ++m) {
      double prod = 1.0;
      for (std::size_t j = 0; j < d.num_slots; ++j) {
        const double mu = inf.activation.truth[m * d.num_slots + j];
        EXPECT_GE(mu, 0.0);
        EXPECT_LE(mu, 1.0);
        prod *= mu;
      }
      EXPECT_NEAR(inf.activation.strength[m], prod, 1e-12);
    }
    double sum = 0.0;
    for (double p : inf.activation.posterior) sum += p;
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(RuleEvaluationTest, StraightThroughMatchesColdSoftSelection) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LogicModel model(SmallConfig(5, 3, 2, 2));
  model.Initialize(4);
  const auto d = model.dims();
  // Margins of at least 5 between the top logit and the rest.
  auto& sel = model.params().Get(kSelection).value;
  for (std::size_t slot = 0; slot < d.num_rules * d.num_slots; ++slot) {
    for (std::size_t i = 0; i < d.num_facts; ++i) {
      sel[slot * d.num_facts + i] = unif(rng);
    }
    sel[slot * d.num_facts + slot % d.num_facts] = 6.5;
  }
  const SelectionOptions soft{0.01, SelectionMode::kDeterministic, false};
  const SelectionOptions hard{0.01, SelectionMode::kDeterministic, true};
  const auto s_soft = SampleStructure(model.logic(), soft, nullptr);
  const auto s_hard = SampleStructure(model.logic(), hard, nullptr);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> c(d.num_facts);
    for (double& x : c) x = unif(rng);
    const auto a = EvaluateRules(c, s_soft, model.logic());
    const auto b = EvaluateRules(c, s_hard, model.logic());
    for (std::size_t m = 0; m < d.num_rules; ++m) {
      EXPECT_NEAR(a.strength[m], b.strength[m], 1e-3);
    }
  }
}

TEST(RuleEvaluationTest, PositiveWeightRuleIsMonotoneInItsFacts) {
  const LogicModel model = ExitRuleModel(5.0);
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    std::vector<double> c = {unif(rng), unif(rng), unif(rng)};
    const double base = model.Posterior(c)[1];
    auto up = c;
    up[0] = std::min(1.0, up[0] + 0.1);
    EXPECT_GE(model.Posterior(up)[1], base - 1e-15);
    auto neg = c;
    neg[2] = std::min(1.0, neg[2] + 0.1);
    EXPECT_LE(model.Posterior(neg)[1], base + 1e-15);
  }
}

TEST(LossTest, UniformPosteriorAndHalfConfidence) {
  EXPECT_NEAR(BinaryCrossEntropy(0.5, 1), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(BinaryCrossEntropy(0.5, 0), std::numbers::ln2, 1e-15);
  // Clipping keeps saturated confidences finite.
  EXPECT_NEAR(BinaryCrossEntropy(0.0, 1), -std::log(kBceClip), 1e-9);
  EXPECT_NEAR(BinaryCrossEntropy(1.0, 0), -std::log(kBceClip), 1e-9);

  LogicModel model(SmallConfig(3, 2, 2, 4));
  model.Initialize(1);
  ClearReasoning(model);
  const std::vector<double> c = {0.5, 0.5, 0.5};
  const Inference inf = model.InferFromFacts(c);
  const std::vector<std::uint8_t> facts = {1, 0, 1}, mask = {1, 1, 1};
  LossConfig cfg;
  cfg.sparsity_weight = 0.0;
  const LossComponents l =
      ComputeLoss(inf.activation.posterior, 2, c, facts, mask, inf.structure,
                  model.params().Get(kRuleWeight).value, cfg);
  EXPECT_NEAR(l.classification, std::log(4.0), 1e-12);
  EXPECT_NEAR(l.classification, 1.386294, 1e-6);
  EXPECT_TRUE(l.fact_present);
  // ln 2 per supervised fact, summed over the three facts.
  EXPECT_NEAR(l.fact, 3 * std::numbers::ln2, 1e-12);
}

TEST(LossTest, TotalIsWeightedSumOfComponents) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  LogicModel model(SmallConfig(5, 3, 2, 3));
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    model.Initialize(seed);
    std::vector<double> c(5);
    for (double& x : c) x = unif(rng);
    std::vector<std::uint8_t> facts(5), mask(5);
    for (std::size_t k = 0; k < 5; ++k) {
      facts[k] = unif(rng) < 0.5;
      mask[k] = unif(rng) < 0.7;
    }
    const Inference inf = model.InferFromFacts(c);
    LossConfig cfg;
    cfg.fact_weight = unif(rng);
    cfg.sparsity_weight = unif(rng) * 0.1;
    const LossComponents l = ComputeLoss(
        inf.activation.posterior, static_cast<int>(seed % 3), c, facts, mask,
        inf.structure, model.params().Get(kRuleWeight).value, cfg);
    // Components are reported already weighted.
    EXPECT_NEAR(l.total, l.classification + l.fact + l.sparsity, 1e-12);
    LossConfig unit = cfg;
    unit.fact_weight = 1.0;
    unit.sparsity_weight = 1.0;
    const LossComponents u = ComputeLoss(
        inf.activation.posterior, static_cast<int>(seed % 3), c, facts, mask,
        inf.structure, model.params().Get(kRuleWeight).value, unit);
    EXPECT_NEAR(l.fact, cfg.fact_weight * u.fact, 1e-12);
    EXPECT_NEAR(l.sparsity, cfg.sparsity_weight * u.sparsity, 1e-12);
  }
}

}  // namespace
}  // namespace factrule
