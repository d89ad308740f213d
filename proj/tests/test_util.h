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

#ifndef FACTRULE_TESTS_TEST_UTIL_H_
#define FACTRULE_TESTS_TEST_UTIL_H_

#include <algorithm>
#include <string>
#include <vector>

#include "factrule/model.h"
#include "factrule/scenario.h"

namespace factrule::testing {

inline FactVocabulary LetterVocabulary(std::size_t n) {
  std::vector<FactDescriptor> facts;
  for (std::size_t k = 0; k < n; ++k) {
    const std::string id(1, static_cast<char>('A' + k));
    facts.push_back({id, id});
  }
  return FactVocabulary(std::move(facts));
}

inline ModelConfig SmallConfig(std::size_t n, std::size_t m, std::size_t l,
                               std::size_t c, std::size_t d = 4) {
  ModelConfig cfg;
  cfg.vocabulary = LetterVocabulary(n);
  for (std::size_t y = 0; y < c; ++y) {
    cfg.classes.push_back({"class" + std::to_string(y), y == 1});
  }
  cfg.feature_dim = d;
  cfg.num_rules = m;
  cfg.num_slots = l;
  return cfg;
}

// Writes a hard-coded rule into slots of rule `m`: one-hot selection logits
// (margin `margin`) and saturated negation pre-gates.
inline void SetRule(LogicModel& model, std::size_t m,
                    const std::vector<std::size_t>& positive,
                    const std::vector<std::size_t>& negated,
                    double margin = 50.0, double gate = 50.0) {
  const auto d = model.dims();
  auto& sel = model.params().Get(kSelection).value;
  auto& neg = model.params().Get(kNegation).value;
  std::vector<std::pair<std::size_t, bool>> lits;
  for (auto k : positive) lits.push_back({k, false});
  for (auto k : negated) lits.push_back({k, true});
  for (std::size_t j = 0; j < d.num_slots; ++j) {
    // Surplus slots repeat the first literal.
    const auto [fact, negate] = lits[j < lits.size() ? j : 0];
    for (std::size_t i = 0; i < d.num_facts; ++i) {
      sel[(m * d.num_slots + j) * d.num_facts + i] = i == fact ? margin : 0.0;
    }
    neg[m * d.num_slots + j] = negate ? gate : -gate;
  }
}

// Zeroes every rule weight and class bias so only rules set explicitly with
// SetRule/SetWeight contribute.
inline void ClearReasoning(LogicModel& model) {
  for (const char* name : {kRuleWeight, kClassBias, kNegation}) {
    auto& v = model.params().Get(name).value;
    std::fill(v.begin(), v.end(), 0.0);
  }
}

inline void SetWeight(LogicModel& model, std::size_t cls, std::size_t rule,
                      double w) {
  const auto d = model.dims();
  model.params().Get(kRuleWeight).value[cls * d.num_rules + rule] = w;
}

// A model whose rules are exactly the generator's labeling rules. Weights grow
// by 3x per priority rank, so on binary facts the highest-priority firing rule
// decides; the default class wins through a small bias when nothing fires.
inline LogicModel GroundTruthModel(const GeneratorConfig& gen) {
  ModelConfig cfg;
  cfg.vocabulary = gen.vocabulary;
  cfg.classes = gen.classes;
  cfg.feature_dim = gen.feature_dim;
  cfg.num_rules = gen.rules.size();
  cfg.num_slots = 1;
  for (const auto& r : gen.rules) {
    cfg.num_slots =
        std::max(cfg.num_slots, r.positive.size() + r.negated.size());
  }
  LogicModel model(cfg);
  model.Initialize(1);
  ClearReasoning(model);
  std::vector<std::size_t> order(gen.rules.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return gen.rules[a].priority < gen.rules[b].priority;
  });
  double w = 10.0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const auto& r = gen.rules[order[rank]];
    SetRule(model, order[rank], r.positive, r.negated);
    SetWeight(model, r.target, order[rank], w);
    w *= 3.0;
  }
  model.params().Get(kClassBias).value[gen.default_class] = 1.0;
  return model;
}

}  // namespace factrule::testing

#endif  // FACTRULE_TESTS_TEST_UTIL_H_
