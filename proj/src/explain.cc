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

#include "factrule/explain.h"

#include <algorithm>

#include "factrule/errors.h"

namespace factrule {

std::optional<CounterfactualResult> FindCounterfactual(
    const Reasoner& reasoner, std::span<const double> confidence, bool exact,
    SearchOptions search, std::optional<std::chrono::milliseconds> budget,
    bool* incomplete) {
  *incomplete = false;
  if (budget) search.deadline = std::chrono::steady_clock::now() + *budget;
  try {
    if (exact) return ExactSearch(reasoner, confidence, search);
    return GreedySearch(reasoner, confidence, search);
  } catch (const NoCounterfactual&) {
    return std::nullopt;
  } catch (const SearchTimeout&) {
    *incomplete = true;
    try {
      return GreedySearch(reasoner, confidence, search);
    } catch (const NoCounterfactual&) {
      return std::nullopt;
    }
  }
}

ExplanationPayload Explain(const Reasoner& reasoner, FactGraph facts,
                           const RuleSet& rules,
                           const ExplainOptions& options) {
  const LogicModel& model = reasoner.model();
  ExplanationPayload out;
  const RuleActivation act = reasoner.Evaluate(facts.confidence);
  out.posterior = act.posterior;
  out.predicted = static_cast<std::size_t>(
      std::max_element(act.posterior.begin(), act.posterior.end()) -
      act.posterior.begin());
  const LogicParams logic = model.logic();
  const std::size_t m_total = model.dims().num_rules;
  for (const SymbolicRule& rule : rules.rules) {
    if (rule.index >= m_total) {
      throw ConfigError("rule set does not match the model");
    }
    const double tau = act.strength[rule.index];
    if (tau <= options.fire_threshold) continue;
    out.fired.push_back(
        {rule.index,
         Render(rule, model.config().vocabulary, model.config().classes), tau,
         logic.rule_weight[out.predicted * m_total + rule.index] * tau});
  }
  std::stable_sort(out.fired.begin(), out.fired.end(),
                   [](const RuleTrace& a, const RuleTrace& b) {
                     return a.contribution > b.contribution;
                   });

  auto sensitivity = SensitivityReport(reasoner, facts.confidence);
  // Most risk-reducing first; keep the head.
  if (sensitivity.size() > options.top_suggestions) {
    sensitivity.resize(options.top_suggestions);
  }
  out.suggestions = std::move(sensitivity);
  if (options.exact_counterfactual) {
    out.counterfactual =
        FindCounterfactual(reasoner, facts.confidence, true, options.search,
                           options.budget, &out.counterfactual_incomplete);
  }
  out.facts = std::move(facts);
  return out;
}

}  // namespace factrule
