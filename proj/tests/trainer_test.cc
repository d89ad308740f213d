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
#include <limits>
#include <map>
#include <vector>

#include "factrule/errors.h"
#include "factrule/scenario.h"
#include "factrule/trainer.h"
#include "gtest/gtest.h"

namespace factrule {
namespace {

struct Fixture {
  GeneratorConfig gen = Clinic8Config();
  Dataset train = GenerateDataset(gen, 300);
  Dataset val = GenerateDataset(gen, 100, 300);
};

TrainConfig ShortConfig() {
  TrainConfig tc;
  tc.epochs = 8;
  tc.warmup_epochs = 3;
  tc.sparsity_start = 4;
  tc.sparsity_ramp = 2;
  return tc;
}

std::map<std::string, std::vector<double>> Values(const LogicModel& model,
                                                  const auto& names) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& n : names) out[n] = model.params().Get(n).value;
  return out;
}

TEST(TrainConfigTest, SparsityAndTemperatureSchedules) {
  TrainConfig tc;
  EXPECT_EQ(tc.SparsityAt(0), 0.0);
  EXPECT_EQ(tc.SparsityAt(19), 0.0);
  EXPECT_NEAR(tc.SparsityAt(30), 0.005, 1e-15);
  EXPECT_NEAR(tc.SparsityAt(40), 0.01, 1e-15);
  EXPECT_NEAR(tc.SparsityAt(99), 0.01, 1e-15);
  for (std::size_t e = 1; e < 100; ++e) {
    EXPECT_GE(tc.SparsityAt(e), tc.SparsityAt(e - 1));
  }
  EXPECT_EQ(tc.TemperatureAt(0, 1.0, 0.1), 1.0);
  EXPECT_EQ(tc.TemperatureAt(5, 1.0, 0.1), 1.0);
  EXPECT_NEAR(tc.TemperatureAt(99, 1.0, 0.1), 0.1, 1e-15);
  for (std::size_t e = 6; e < 100; ++e) {
    EXPECT_LT(tc.TemperatureAt(e, 1.0, 0.1), tc.TemperatureAt(e - 1, 1.0, 0.1));
  }
}

TEST(TrainConfigTest, ValidationErrors) {
  TrainConfig tc;
  tc.warmup_epochs = tc.epochs;
  EXPECT_THROW(tc.Validate(), ConfigError);
  tc = TrainConfig{};
  tc.batch_size = 0;
  EXPECT_THROW(tc.Validate(), ConfigError);
  tc = TrainConfig{};
  tc.learning_rate = -1;
  EXPECT_THROW(tc.Validate(), ConfigError);
}

TEST(SupervisionMasksTest, Modes) {
  const auto full = SupervisionMasks(Supervision::kFull, 0.2, 50, 8, 1);
  const auto weak = SupervisionMasks(Supervision::kWeak, 0.2, 50, 8, 1);
  const auto semi = SupervisionMasks(Supervision::kSemi, 0.2, 1000, 8, 1);
  for (const auto& m : full) EXPECT_EQ(m, std::vector<std::uint8_t>(8, 1));
  for (const auto& m : weak) EXPECT_TRUE(m.empty());
  double labeled = 0;
  for (const auto& m : semi) {
    ASSERT_TRUE(m.empty() || m.size() == 8u);
    labeled += !m.empty();
  }
  EXPECT_NEAR(labeled / 1000, 0.2, 0.04);
  EXPECT_EQ(semi, SupervisionMasks(Supervision::kSemi, 0.2, 1000, 8, 1));
}

TEST(StepSeedTest, DistinctAcrossCoordinates) {
  EXPECT_EQ(StepSeed(1, 2, 3), StepSeed(1, 2, 3));
  EXPECT_NE(StepSeed(1, 2, 3), StepSeed(1, 3, 2));
  EXPECT_NE(StepSeed(1, 2, 3), StepSeed(2, 2, 3));
}

TEST(TrainTest, WarmupFreezesReasoningGroups) {
  Fixture f;
  TrainConfig tc = ShortConfig();
  LogicModel model = MakeModel(f.gen, ModelConfig{}, 1, tc.init);
  std::vector<std::map<std::string, std::vector<double>>> logic, fusion;
  Train(model, f.train.samples, f.val.samples, tc, [&](const EpochRecord& r) {
    logic.push_back(Values(model, LogicModel::ReasoningGroups()));
    fusion.push_back(Values(model, LogicModel::FusionGroups()));
    EXPECT_EQ(r.phase, r.epoch < 3 ? "warmup" : "joint");
    if (r.epoch < 3) EXPECT_EQ(r.classification, 0.0);
  });
  ASSERT_EQ(logic.size(), 8u);
  EXPECT_EQ(logic[0], logic[2]);
  EXPECT_NE(fusion[0], fusion[2]);
  EXPECT_NE(logic[2], logic[3]);
}

TEST(TrainTest, HistoryAndDeterminism) {
  Fixture f;
  TrainConfig tc = ShortConfig();
  LogicModel a = MakeModel(f.gen, ModelConfig{}, 1, tc.init);
  LogicModel b = MakeModel(f.gen, ModelConfig{}, 1, tc.init);
  const auto ha = Train(a, f.train.samples, f.val.samples, tc);
  const auto hb = Train(b, f.train.samples, f.val.samples, tc);
  ASSERT_EQ(ha.size(), 8u);
  for (std::size_t e = 0; e < ha.size(); ++e) {
    EXPECT_EQ(ha[e].epoch, e);
    EXPECT_EQ(ha[e].total, hb[e].total);
    EXPECT_TRUE(ha[e].fact.has_value());
    EXPECT_TRUE(ha[e].val_accuracy.has_value());
    EXPECT_NEAR(ha[e].total,
                ha[e].classification + *ha[e].fact + ha[e].sparsity, 1e-9);
  }
  for (const auto& g : a.params().groups()) {
    EXPECT_EQ(g.value, b.params().Get(g.name).value) << g.name;
  }
  for (double w : a.params().Get(kRuleWeight).value) EXPECT_GE(w, 0.0);
  EXPECT_GT(ha.back().sparsity_weight, 0.0);
  EXPECT_TRUE(ha.back().active_rules.has_value());
}

TEST(TrainTest, WeakSupervisionReportsNoFactLoss) {
  Fixture f;
  TrainConfig tc = ShortConfig();
  tc.supervision = Supervision::kWeak;
  LogicModel model = MakeModel(f.gen, ModelConfig{}, 1, tc.init);
  for (const auto& r : Train(model, f.train.samples, {}, tc)) {
    EXPECT_FALSE(r.fact.has_value());
    EXPECT_FALSE(r.val_accuracy.has_value());
  }
}

TEST(TrainTest, NonFiniteInputRaisesDivergenceWithSnapshot) {
  Fixture f;
  f.train.samples[5].views[1].features[0] =
      std::numeric_limits<double>::quiet_NaN();
  TrainConfig tc = ShortConfig();
  LogicModel model = MakeModel(f.gen, ModelConfig{}, 1, tc.init);
  try {
    Train(model, f.train.samples, f.val.samples, tc);
    FAIL() << "expected divergence";
  } catch (const TrainingDiverged& e) {
    EXPECT_FALSE(e.snapshot().empty());
    EXPECT_NE(e.snapshot().find("epoch"), std::string::npos);
  }
}

TEST(TrainTest, LearnsTheReferenceScenario) {
  GeneratorConfig gen = Clinic8Config();
  const Dataset train = GenerateDataset(gen, 3000);
  const Dataset val = GenerateDataset(gen, 1000, 3000);
  TrainConfig tc;
  tc.epochs = 60;
  LogicModel model = MakeModel(gen, ModelConfig{}, 1, tc.init);
  const auto history = Train(model, train.samples, val.samples, tc);
  // Label noise caps accuracy near 1 - 0.05.
  EXPECT_GE(*history.back().val_accuracy, 0.92);
  EXPECT_GE(*history.back().val_fact_accuracy, 0.98);
}

}  // namespace
}  // namespace factrule
