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

#include "factrule/rules.h"

#include <algorithm>
#include <set>

#include "factrule/errors.h"

namespace factrule {

std::size_t SymbolicRule::top_class() const {
  return static_cast<std::size_t>(
      std::max_element(class_weights.begin(), class_weights.end()) -
      class_weights.begin());
}

double SymbolicRule::top_weight() const {
  return class_weights.empty()
             ? 0.0
             : *std::max_element(class_weights.begin(), class_weights.end());
}

void DiscretizeSlot(std::span<const double> gamma, double eta, double tau_prune,
                    std::vector<std::size_t>* positive,
                    std::vector<std::size_t>* negated) {
  for (std::size_t i = 0; i < gamma.size(); ++i) {
    if (gamma[i] * (1.0 - eta) > tau_prune) positive->push_back(i);
    if (gamma[i] * eta > tau_prune) negated->push_back(i);
  }
}

std::vector<SymbolicRule> Discretize(const LogicModel& model,
                                     double tau_prune) {
  if (!(tau_prune > 0 && tau_prune < 1)) {
    throw ConfigError("tau_prune must lie in (0, 1)");
  }
  SelectionOptions soft{model.config().tau_end, SelectionMode::kDeterministic,
                        /*hard_forward=*/false};
  const LogicParams logic = model.logic();
  const RuleStructure s = SampleStructure(logic, soft, nullptr);
  const auto& d = s.dims;
  std::vector<SymbolicRule> out;
  for (std::size_t m = 0; m < d.num_rules; ++m) {
    SymbolicRule r;
    r.index = m;
    for (std::size_t j = 0; j < d.num_slots; ++j) {
      DiscretizeSlot(s.soft_at(m, j), s.gate[m * d.num_slots + j], tau_prune,
                     &r.positive, &r.negated);
    }
    std::set<std::size_t> pos(r.positive.begin(), r.positive.end());
    std::set<std::size_t> neg(r.negated.begin(), r.negated.end());
    r.positive.assign(pos.begin(), pos.end());
    r.negated.assign(neg.begin(), neg.end());
    for (auto k : pos) r.contradictory = r.contradictory || neg.contains(k);
    r.class_weights.resize(d.num_classes);
    for (std::size_t y = 0; y < d.num_classes; ++y) {
      r.class_weights[y] = logic.rule_weight[y * d.num_rules + m];
    }
    out.push_back(std::move(r));
  }
  return out;
}

double RuleFiring(const SymbolicRule& rule,
                  std::span<const double> confidence) {
  double t = 1.0;
  for (auto k : rule.positive) t *= confidence[k];
  for (auto k : rule.negated) t *= 1.0 - confidence[k];
  return t;
}

double RuleReliability(const SymbolicRule& rule,
                       std::span<const ValidationPoint> validation) {
  const int target = static_cast<int>(rule.top_class());
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& p : validation) {
    if (p.label != target) continue;
    sum += RuleFiring(rule, p.confidence);
    ++count;
  }
  return count ? sum / static_cast<double>(count) : 0.0;
}

RuleSet Prune(std::vector<SymbolicRule> candidates,
              std::span<const ValidationPoint> validation,
              const PruneOptions& options) {
  if (validation.empty()) {
    throw ConfigError("rule pruning needs a non-empty validation set");
  }
  RuleSet set;
  set.rho_min = options.rho_min;
  set.min_weight = options.min_weight;
  for (auto& r : candidates) {
    if (r.contradictory || r.literal_count() < 2) continue;
    if (r.top_weight() < options.min_weight) continue;
    r.reliability = RuleReliability(r, validation);
    if (r.reliability < options.rho_min) continue;
    set.rules.push_back(std::move(r));
  }
  std::stable_sort(set.rules.begin(), set.rules.end(),
                   [](const SymbolicRule& a, const SymbolicRule& b) {
                     if (a.top_weight() != b.top_weight()) {
                       return a.top_weight() > b.top_weight();
                     }
                     return a.index < b.index;
                   });
  if (set.rules.empty()) set.warnings.push_back("all rules pruned");
  return set;
}

RuleSet ExtractRules(const LogicModel& model,
                     std::span<const ValidationPoint> validation,
                     const ExtractOptions& options) {
  RuleSet set =
      Prune(Discretize(model, options.tau_prune), validation, options.prune);
  set.tau_prune = options.tau_prune;
  set.temperature = model.config().tau_end;
  return set;
}

std::string Render(const SymbolicRule& rule, const FactVocabulary& vocabulary,
                   const std::vector<ClassInfo>& classes) {
  std::vector<std::pair<std::size_t, bool>> lits;
  for (auto k : rule.positive) lits.push_back({k, false});
  for (auto k : rule.negated) lits.push_back({k, true});
  std::sort(lits.begin(), lits.end());
  const std::size_t cls = rule.top_class();
  if (cls >= classes.size()) throw ConfigError("rule class out of range");
  std::string out = classes[cls].name + " ←";
  for (std::size_t i = 0; i < lits.size(); ++i) {
    if (lits[i].first >= vocabulary.size()) {
      throw ConfigError("unknown fact index " + std::to_string(lits[i].first));
    }
    out += i == 0 ? " " : " ∧ ";
    if (lits[i].second) out += "¬";
    out += vocabulary[lits[i].first].id;
  }
  return out;
}

std::size_t CountRiskRules(const RuleSet& rules,
                           const std::vector<ClassInfo>& classes) {
  std::size_t n = 0;
  for (const auto& r : rules.rules) {
    if (classes.at(r.top_class()).risk) ++n;
  }
  return n;
}

}  // namespace factrule
