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

#ifndef FACTRULE_LOGIC_LAYER_H_
#define FACTRULE_LOGIC_LAYER_H_

#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace factrule {

enum class SelectionMode { kSampled, kDeterministic };

struct LogicDims {
  std::size_t num_rules = 16;
  std::size_t num_slots = 4;
  std::size_t num_facts = 0;
  std::size_t num_classes = 0;
};

// Read-only view over the reasoning parameters.
//   selection   M x L x N   literal-selection logits
//   negation    M x L       pre-sigmoid negation gates
//   rule_weight C x M
//   class_bias  C
struct LogicParams {
  LogicDims dims;
  std::span<const double> selection;
  std::span<const double> negation;
  std::span<const double> rule_weight;
  std::span<const double> class_bias;
};

struct LogicGrads {
  std::span<double> selection;
  std::span<double> negation;
  std::span<double> rule_weight;
  std::span<double> class_bias;
};

struct SelectionOptions {
  double temperature = 1.0;
  SelectionMode mode = SelectionMode::kDeterministic;
  // Straight-through: forward the arg-max one-hot, differentiate the soft one.
  bool hard_forward = false;
};

// A single slot's selection. `soft` is the relaxed distribution; `forward`
// is what the literal actually consumes (one-hot under hard_forward).
struct Selection {
  std::vector<double> soft;
  std::vector<double> forward;
};

std::vector<double> Softmax(std::span<const double> scores);

Selection SelectLiteral(std::span<const double> selection_logits,
                        const SelectionOptions& options, std::mt19937_64* rng);

// (1 - eta) * <gamma, c> + eta * (1 - <gamma, c>).
double LiteralTruth(std::span<const double> gamma, double eta,
                    std::span<const double> confidence);

// Product t-norm.
double RuleStrength(std::span<const double> truths);

// softmax_y(bias_y + sum_m weight[y, m] * strength_m).
std::vector<double> ClassPosterior(std::span<const double> strengths,
                                   std::span<const double> rule_weight,
                                   std::span<const double> class_bias);

// One structure sample shared by every item of a batch.
struct RuleStructure {
  LogicDims dims;
  SelectionOptions options;
  std::vector<double> soft;     // M x L x N
  std::vector<double> forward;  // M x L x N
  std::vector<double> gate;     // M x L, sigma(negation)

  std::span<const double> forward_at(std::size_t m, std::size_t j) const {
    return {forward.data() + (m * dims.num_slots + j) * dims.num_facts,
            dims.num_facts};
  }
  std::span<const double> soft_at(std::size_t m, std::size_t j) const {
    return {soft.data() + (m * dims.num_slots + j) * dims.num_facts,
            dims.num_facts};
  }
};

RuleStructure SampleStructure(const LogicParams& params,
                              const SelectionOptions& options,
                              std::mt19937_64* rng);

// Every intermediate of one forward pass over a fact vector.
struct RuleActivation {
  std::vector<double> atom;      // M x L, <gamma, c>
  std::vector<double> truth;     // M x L, literal truth
  std::vector<double> strength;  // M
  std::vector<double> scores;    // C
  std::vector<double> posterior; // C
};

RuleActivation EvaluateRules(std::span<const double> confidence,
                             const RuleStructure& structure,
                             const LogicParams& params);

struct ReasonResult {
  RuleStructure structure;
  RuleActivation activation;
};

ReasonResult Reason(std::span<const double> confidence,
                    const LogicParams& params, const SelectionOptions& options,
                    std::mt19937_64* rng);

// Accumulates gradients of one sample given d(loss)/d(scores). Rule-weight
// and bias gradients go to `grads`; structure gradients go to d_forward
// (M x L x N) and d_gate (M x L, w.r.t. the gate value); fact gradients go
// to d_confidence.
void BackpropRules(std::span<const double> confidence,
                   const RuleStructure& structure,
                   const RuleActivation& activation,
                   const LogicParams& params,
                   std::span<const double> d_scores, LogicGrads grads,
                   std::span<double> d_forward, std::span<double> d_gate,
                   std::span<double> d_confidence);

// Maps accumulated d_forward / d_gate back to selection logits and
// negation pre-gates (straight-through when hard_forward is set).
void BackpropStructure(const RuleStructure& structure,
                       std::span<const double> d_forward,
                       std::span<const double> d_gate, LogicGrads grads);

// Sum over slots of the Shannon entropy of the soft selections; gradients
// w.r.t. the soft selections are written to d_soft scaled by `scale`.
double SelectionEntropy(const RuleStructure& structure, double scale,
                        std::span<double> d_soft);

}  // namespace factrule

#endif  // FACTRULE_LOGIC_LAYER_H_
