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

#ifndef FACTRULE_MODEL_H_
#define FACTRULE_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "factrule/fact_fusion.h"
#include "factrule/logic_layer.h"
#include "factrule/param_store.h"

namespace factrule {

inline constexpr char kPredWeight[] = "pred_weight";
inline constexpr char kPredBias[] = "pred_bias";
inline constexpr char kRelWeight[] = "rel_weight";
inline constexpr char kSelection[] = "selection";
inline constexpr char kNegation[] = "negation";
inline constexpr char kRuleWeight[] = "rule_weight";
inline constexpr char kClassBias[] = "class_bias";

struct ClassInfo {
  std::string name;
  bool risk = false;
};

struct ModelConfig {
  FactVocabulary vocabulary;
  std::vector<ClassInfo> classes;
  std::size_t feature_dim = 0;
  std::size_t num_rules = 16;
  std::size_t num_slots = 4;
  FusionOptions fusion;
  // Gumbel temperature annealed geometrically from start to end.
  double tau_start = 1.0;
  double tau_end = 0.1;
};

struct InitOptions {
  double head_scale = 0.0;  // 0 selects 1/sqrt(D)
  double selection_scale = 2.0;
  double rule_weight_scale = 0.5;
};

// Deterministic inference output: fact graph plus the reasoning trace.
struct Inference {
  FactGraph facts;
  RuleStructure structure;
  RuleActivation activation;

  std::size_t predicted() const;
};

// All learnable parameters (fusion heads and reasoning layer) and the fixed
// configuration that gives them meaning.
class LogicModel {
 public:
  explicit LogicModel(ModelConfig config);

  // Seeded random initialization. Negation pre-gates start at 0 (gate 0.5).
  void Initialize(std::uint64_t seed, const InitOptions& init = {});

  const ModelConfig& config() const { return config_; }
  LogicDims dims() const;
  std::size_t num_facts() const { return config_.vocabulary.size(); }
  std::size_t num_classes() const { return config_.classes.size(); }

  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }

  HeadParams heads() const;
  HeadGrads head_grads();
  LogicParams logic() const;
  LogicGrads logic_grads();

  // Deterministic, hard-forward selection at the final temperature.
  SelectionOptions EvalSelection() const;

  Inference Infer(std::span<const ViewObservation> views) const;
  Inference InferFromFacts(std::span<const double> confidence) const;
  std::vector<double> Posterior(std::span<const double> confidence) const;

  static const std::vector<std::string>& FusionGroups();
  static const std::vector<std::string>& ReasoningGroups();

 private:
  ModelConfig config_;
  ParamStore params_;
};

// Deterministic evaluator over a frozen structure (selections and gates are
// resolved once). Holds a reference to the model's parameters.
class Reasoner {
 public:
  explicit Reasoner(const LogicModel& model);

  RuleActivation Evaluate(std::span<const double> confidence) const;
  std::vector<double> Posterior(std::span<const double> confidence) const;
  const RuleStructure& structure() const { return structure_; }
  const LogicModel& model() const { return *model_; }

 private:
  const LogicModel* model_;
  RuleStructure structure_;
};

// One supervised item. `fact_mask` empty means no fact labels.
struct LabeledSample {
  std::span<const ViewObservation> views;
  std::span<const std::uint8_t> facts;
  std::span<const std::uint8_t> fact_mask;
  int label = 0;
};

enum class SparsityForm { kEntropy, kLiteralL1 };

struct LossConfig {
  double classification_weight = 1.0;
  double fact_weight = 1.0;
  // Current sparsity coefficient (the trainer evaluates the ramp).
  double sparsity_weight = 0.0;
  SparsityForm sparsity_form = SparsityForm::kEntropy;
  // Reserved; a calibration term is not defined, so this must stay 0.
  double calibration_weight = 0.0;
};

// Weighted components; total is their sum.
struct LossComponents {
  double classification = 0.0;
  double fact = 0.0;
  double sparsity = 0.0;
  double total = 0.0;
  bool fact_present = false;
};

struct StepOptions {
  SelectionOptions selection;
  std::uint64_t seed = 0;
};

// Total loss of a batch. Gradients are accumulated into model.params().
LossComponents ForwardBackward(LogicModel& model,
                               std::span<const LabeledSample> batch,
                               const LossConfig& loss,
                               const StepOptions& step);

}  // namespace factrule

#endif  // FACTRULE_MODEL_H_
