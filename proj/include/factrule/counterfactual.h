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

#ifndef FACTRULE_COUNTERFACTUAL_H_
#define FACTRULE_COUNTERFACTUAL_H_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "factrule/model.h"

namespace factrule {

// Hard intervention on one fact: c_i := value (0 or 1).
struct FactIntervention {
  std::size_t fact = 0;
  std::uint8_t value = 0;

  friend bool operator==(const FactIntervention&, const FactIntervention&) =
      default;
};

struct CounterfactualResult {
  std::vector<FactIntervention> interventions;  // sorted by fact
  std::size_t original_label = 0;
  std::vector<double> original_posterior;
  std::size_t new_label = 0;
  std::vector<double> new_posterior;
  double risk_before = 0.0;
  double risk_after = 0.0;
  // True when produced by the complete search (minimal cardinality).
  bool exact = true;

  std::size_t cardinality() const { return interventions.size(); }
  double risk_delta() const { return risk_after - risk_before; }
  // Relative risk change in percent; 0 when the original risk is 0.
  double risk_change_percent() const;
};

struct SensitivityEntry {
  FactIntervention intervention;
  std::vector<double> posterior;
  std::size_t label = 0;
  bool label_changed = false;
  double risk_delta = 0.0;
};

struct SearchOptions {
  std::size_t max_card = 3;
  // Exact search refuses vectors with more facts unless forced.
  std::size_t exact_cap = 15;
  bool force_exact = false;
  std::optional<std::chrono::steady_clock::time_point> deadline;
};

// Thrown by ExactSearch when the deadline passes.
class SearchTimeout : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::vector<double> ApplyInterventions(
    std::span<const double> confidence,
    std::span<const FactIntervention> interventions);

// Sum of posterior mass on classes flagged as risk.
double RiskProbability(const std::vector<ClassInfo>& classes,
                       std::span<const double> posterior);

// Iterative deepening over cardinality 1..max_card. At the first cardinality
// with a flipping intervention, returns the one with the largest post-flip
// margin P(new label) - P(original label); ties keep the lowest fact indices,
// then set-to-0 before set-to-1. Interventions equal to the current value are
// skipped. Throws NoCounterfactual, or SearchTimeout past the deadline.
CounterfactualResult ExactSearch(const Reasoner& reasoner,
                                 std::span<const double> confidence,
                                 const SearchOptions& options = {});

// Repeatedly applies the single intervention that most lowers the original
// class posterior (ties: lowest fact, then set-to-0) until the label flips.
CounterfactualResult GreedySearch(const Reasoner& reasoner,
                                  std::span<const double> confidence,
                                  const SearchOptions& options = {});

// All non-identity single-fact interventions, ascending by risk delta.
std::vector<SensitivityEntry> SensitivityReport(
    const Reasoner& reasoner, std::span<const double> confidence);

}  // namespace factrule

#endif  // FACTRULE_COUNTERFACTUAL_H_
