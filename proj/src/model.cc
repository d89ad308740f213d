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

#include "factrule/model.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "factrule/errors.h"
#include "factrule/loss.h"

namespace factrule {

std::size_t Inference::predicted() const {
  const auto& p = activation.posterior;
  return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) -
                                  p.begin());
}

LogicModel::LogicModel(ModelConfig config) : config_(std::move(config)) {
  const std::size_t n = config_.vocabulary.size();
  const std::size_t d = config_.feature_dim;
  const std::size_t m = config_.num_rules;
  const std::size_t l = config_.num_slots;
  const std::size_t c = config_.classes.size();
  if (n == 0 || d == 0 || m == 0 || l == 0 || c == 0) {
    throw ConfigError("model dimensions must be positive");
  }
  if (!(config_.tau_start > 0) || !(config_.tau_end > 0)) {
    throw ConfigError("Gumbel temperatures must be positive");
  }
  params_.Add(kPredWeight, {n, d});
  params_.Add(kPredBias, {n});
  params_.Add(kRelWeight, {n, d});
  params_.Add(kSelection, {m, l, n});
  params_.Add(kNegation, {m, l});
  params_.Add(kRuleWeight, {c, m});
  params_.Add(kClassBias, {c});
}

void LogicModel::Initialize(std::uint64_t seed, const InitOptions& init) {
  std::mt19937_64 rng(seed);
  const double head_scale =
      init.head_scale > 0
          ? init.head_scale
          : 1.0 / std::sqrt(static_cast<double>(config_.feature_dim));
  auto fill = [&](const char* name, double scale) {
    std::normal_distribution<double> dist(0.0, 1.0);
    for (double& x : params_.Get(name).value) x = scale * dist(rng);
  };
  fill(kPredWeight, head_scale);
  fill(kRelWeight, head_scale);
  fill(kSelection, init.selection_scale);
  fill(kRuleWeight, init.rule_weight_scale);
  for (const char* zero : {kPredBias, kNegation, kClassBias}) {
    auto& v = params_.Get(zero).value;
    std::fill(v.begin(), v.end(), 0.0);
  }
  params_.ZeroGrads();
}

LogicDims LogicModel::dims() const {
  return LogicDims{config_.num_rules, config_.num_slots, num_facts(),
                   num_classes()};
}

HeadParams LogicModel::heads() const {
  return HeadParams{num_facts(),
                    config_.feature_dim,
                    params_.Get(kPredWeight).value,
                    params_.Get(kPredBias).value,
                    params_.Get(kRelWeight).value};
}

HeadGrads LogicModel::head_grads() {
  return HeadGrads{params_.Get(kPredWeight).grad, params_.Get(kPredBias).grad,
                   params_.Get(kRelWeight).grad};
}

LogicParams LogicModel::logic() const {
  return LogicParams{dims(), params_.Get(kSelection).value,
                     params_.Get(kNegation).value,
                     params_.Get(kRuleWeight).value,
                     params_.Get(kClassBias).value};
}

LogicGrads LogicModel::logic_grads() {
  return LogicGrads{params_.Get(kSelection).grad, params_.Get(kNegation).grad,
                    params_.Get(kRuleWeight).grad,
                    params_.Get(kClassBias).grad};
}

SelectionOptions LogicModel::EvalSelection() const {
  return SelectionOptions{config_.tau_end, SelectionMode::kDeterministic,
                          /*hard_forward=*/true};
}

Inference LogicModel::Infer(std::span<const ViewObservation> views) const {
  Inference out;
  out.facts = BuildFactGraph(views, heads(), config_.fusion);
  out.structure = SampleStructure(logic(), EvalSelection(), nullptr);
  out.activation = EvaluateRules(out.facts.confidence, out.structure, logic());
  return out;
}

Inference LogicModel::InferFromFacts(std::span<const double> confidence) const {
  Inference out;
  out.facts = FactGraphFromConfidences(confidence);
  out.structure = SampleStructure(logic(), EvalSelection(), nullptr);
  out.activation = EvaluateRules(out.facts.confidence, out.structure, logic());
  return out;
}

std::vector<double> LogicModel::Posterior(
    std::span<const double> confidence) const {
  return InferFromFacts(confidence).activation.posterior;
}

Reasoner::Reasoner(const LogicModel& model)
    : model_(&model),
      structure_(SampleStructure(model.logic(), model.EvalSelection(), nullptr)) {}

RuleActivation Reasoner::Evaluate(std::span<const double> confidence) const {
  return EvaluateRules(confidence, structure_, model_->logic());
}

std::vector<double> Reasoner::Posterior(
    std::span<const double> confidence) const {
  return Evaluate(confidence).posterior;
}

const std::vector<std::string>& LogicModel::FusionGroups() {
  static const std::vector<std::string> kGroups = {kPredWeight, kPredBias,
                                                   kRelWeight};
  return kGroups;
}

const std::vector<std::string>& LogicModel::ReasoningGroups() {
  static const std::vector<std::string> kGroups = {kSelection, kNegation,
                                                   kRuleWeight, kClassBias};
  return kGroups;
}

namespace {

void RequireFinite(std::span<const double> v, const char* name) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError(name, "non-finite value");
  }
}

double LogSumExp(std::span<const double> v) {
  const double top = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - top);
  return top + std::log(s);
}

}  // namespace

LossComponents ForwardBackward(LogicModel& model,
                               std::span<const LabeledSample> batch,
                               const LossConfig& loss,
                               const StepOptions& step) {
  if (batch.empty()) throw ConfigError("batch must not be empty");
  if (loss.calibration_weight != 0.0) {
    throw ConfigError("calibration loss is not defined; weight must be 0");
  }
  const std::size_t n = model.num_facts();
  const std::size_t nc = model.num_classes();
  ParamStore& params = model.params();
  params.ZeroGrads();

  const HeadParams heads = model.heads();
  const LogicParams logic = model.logic();
  HeadGrads head_grads = model.head_grads();
  LogicGrads logic_grads = model.logic_grads();
  const FusionOptions& fusion = model.config().fusion;

  std::mt19937_64 rng(step.seed);
  const RuleStructure structure =
      SampleStructure(logic, step.selection, &rng);

  std::vector<double> d_forward(structure.soft.size(), 0.0);
  std::vector<double> d_gate(structure.gate.size(), 0.0);
  std::vector<double> d_scores(nc), d_conf(n);
  const double inv_b = 1.0 / static_cast<double>(batch.size());

  LossComponents out;
  double ce_sum = 0.0;
  double fact_sum = 0.0;
  for (const LabeledSample& s : batch) {
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= nc) {
      throw ConfigError("label " + std::to_string(s.label) + " out of range");
    }
    const bool has_facts = !s.fact_mask.empty();
    if (has_facts && (s.fact_mask.size() != n || s.facts.size() != n)) {
      throw ConfigError("fact labels/mask do not match fact count");
    }
    FactGraph graph = BuildFactGraph(s.views, heads, fusion);
    RequireFinite(graph.confidence, "confidence");
    std::fill(d_conf.begin(), d_conf.end(), 0.0);

    if (loss.classification_weight != 0.0) {
      RuleActivation act = EvaluateRules(graph.confidence, structure, logic);
      RequireFinite(act.scores, "class_scores");
      ce_sum += LogSumExp(act.scores) - act.scores[s.label];
      const double scale = loss.classification_weight * inv_b;
      for (std::size_t y = 0; y < nc; ++y) {
        d_scores[y] = scale * (act.posterior[y] -
                               (static_cast<int>(y) == s.label ? 1.0 : 0.0));
      }
      BackpropRules(graph.confidence, structure, act, logic, d_scores,
                    logic_grads, d_forward, d_gate, d_conf);
    }
    if (has_facts && loss.fact_weight != 0.0) {
      const double scale = loss.fact_weight * inv_b;
      for (std::size_t k = 0; k < n; ++k) {
        if (!s.fact_mask[k]) continue;
        out.fact_present = true;
        fact_sum += BinaryCrossEntropy(graph.confidence[k], s.facts[k]);
        d_conf[k] +=
            scale * BinaryCrossEntropyGrad(graph.confidence[k], s.facts[k]);
      }
    } else if (has_facts) {
      for (std::size_t k = 0; k < n; ++k) {
        if (s.fact_mask[k]) out.fact_present = true;
      }
    }
    if (graph.num_views > 0) {
      BackpropFactGraph(graph, s.views, d_conf, fusion, head_grads);
    }
  }
  out.classification = loss.classification_weight * ce_sum * inv_b;
  out.fact = loss.fact_weight * fact_sum * inv_b;

  if (loss.sparsity_weight != 0.0) {
    double selection = 0.0;
    if (loss.sparsity_form == SparsityForm::kEntropy) {
      selection = SelectionEntropy(structure, loss.sparsity_weight, d_forward);
    } else {
      // sum(gamma) == 1 per slot: value is constant, gradient through the
      // softmax Jacobian vanishes.
      selection = SelectionSparsity(structure, SparsityForm::kLiteralL1);
      for (double& g : d_forward) g += loss.sparsity_weight;
    }
    double l1 = 0.0;
    const auto w = logic.rule_weight;
    for (std::size_t i = 0; i < w.size(); ++i) {
      l1 += std::abs(w[i]);
      logic_grads.rule_weight[i] +=
          loss.sparsity_weight * (w[i] > 0 ? 1.0 : (w[i] < 0 ? -1.0 : 0.0));
    }
    out.sparsity = loss.sparsity_weight * (selection + l1);
  }
  BackpropStructure(structure, d_forward, d_gate, logic_grads);

  out.total = out.classification + out.fact + out.sparsity;
  if (!std::isfinite(out.total)) throw NumericalError("loss", "non-finite loss");
  params.CheckFiniteGrads();
  return out;
}

}  // namespace factrule
