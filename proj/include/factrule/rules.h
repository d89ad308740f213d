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

#ifndef FACTRULE_RULES_H_
#define FACTRULE_RULES_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "factrule/model.h"

namespace factrule {

struct SymbolicRule {
  std::size_t index = 0;
  std::vector<std::size_t> positive;  // sorted, unique
  std::vector<std::size_t> negated;   // sorted, unique
  std::vector<double> class_weights;  // column of the rule-weight matrix
  double reliability = 0.0;
  // A fact selected both plainly and negated; such a rule never fires.
  bool contradictory = false;

  std::size_t top_class() const;
  double top_weight() const;
  std::size_t literal_count() const { return positive.size() + negated.size(); }
};

struct RuleSet {
  std::vector<SymbolicRule> rules;
  double tau_prune = 0.5;
  double rho_min = 0.1;
  double min_weight = 0.05;
  double temperature = 0.1;
  std::vector<std::string> warnings;
};

// Confidence vector paired with its class label, used for reliability.
struct ValidationPoint {
  std::vector<double> confidence;
  int label = 0;
};

// Per slot: gate eta and deterministic selection gamma = softmax(logits / T)
// at the model's final temperature. Fact i joins the positive set when
// gamma_i * (1 - eta) > tau_prune, the negated set when gamma_i * eta >
// tau_prune; otherwise the slot is vacant.
std::vector<SymbolicRule> Discretize(const LogicModel& model, double tau_prune);

// Same thresholding for a single slot.
void DiscretizeSlot(std::span<const double> gamma, double eta, double tau_prune,
                    std::vector<std::size_t>* positive,
                    std::vector<std::size_t>* negated);

// Product t-norm of the rule's literal sets on `confidence`.
double RuleFiring(const SymbolicRule& rule, std::span<const double> confidence);

// Mean firing over validation points labelled with the rule's top class.
double RuleReliability(const SymbolicRule& rule,
                       std::span<const ValidationPoint> validation);

struct PruneOptions {
  double rho_min = 0.1;
  // Rules whose largest class weight is below this are inactive.
  double min_weight = 0.05;
};

// Drops contradictory rules, rules with fewer than two literals, rules whose
// reliability falls below rho_min, and rules below min_weight. Retained rules
// are ordered by descending top class weight, ties by index.
RuleSet Prune(std::vector<SymbolicRule> candidates,
              std::span<const ValidationPoint> validation,
              const PruneOptions& options);

struct ExtractOptions {
  double tau_prune = 0.5;
  PruneOptions prune;
};

RuleSet ExtractRules(const LogicModel& model,
                     std::span<const ValidationPoint> validation,
                     const ExtractOptions& options = {});

// "Class ← a ∧ b ∧ ¬c", literals by fact index.
std::string Render(const SymbolicRule& rule, const FactVocabulary& vocabulary,
                   const std::vector<ClassInfo>& classes);

// Retained rules whose top class is flagged as a risk class.
std::size_t CountRiskRules(const RuleSet& rules,
                           const std::vector<ClassInfo>& classes);

}  // namespace factrule

#endif  // FACTRULE_RULES_H_
