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

#ifndef FACTRULE_EXPLAIN_H_
#define FACTRULE_EXPLAIN_H_

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factrule/counterfactual.h"
#include "factrule/fact_fusion.h"
#include "factrule/model.h"
#include "factrule/rules.h"

namespace factrule {

struct RuleTrace {
  std::size_t rule = 0;       // index into the model's rules
  std::string text;           // rendered symbolic rule
  double strength = 0.0;      // tau_m of the model on this input
  double contribution = 0.0;  // w[predicted, m] * tau_m
};

struct ExplanationPayload {
  std::size_t predicted = 0;
  std::vector<double> posterior;
  // Confidences always; attribution only when built from views.
  FactGraph facts;
  std::vector<RuleTrace> fired;
  std::vector<SensitivityEntry> suggestions;
  std::optional<CounterfactualResult> counterfactual;
  // Set when the exact search timed out and a greedy result is reported.
  bool counterfactual_incomplete = false;
};

struct ExplainOptions {
  // Retained rules whose strength exceeds this are reported as fired.
  double fire_threshold = 0.5;
  std::size_t top_suggestions = 3;
  bool exact_counterfactual = false;
  SearchOptions search;
  std::optional<std::chrono::milliseconds> budget;
};

ExplanationPayload Explain(const Reasoner& reasoner, FactGraph facts,
                           const RuleSet& rules,
                           const ExplainOptions& options = {});

// Searches for a counterfactual: exact when requested (greedy result with
// `incomplete` set on timeout), greedy otherwise. Returns nullopt when no
// flip exists within max_card.
std::optional<CounterfactualResult> FindCounterfactual(
    const Reasoner& reasoner, std::span<const double> confidence, bool exact,
    SearchOptions search, std::optional<std::chrono::milliseconds> budget,
    bool* incomplete);

}  // namespace factrule

#endif  // FACTRULE_EXPLAIN_H_
