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

#ifndef FACTRULE_METRICS_H_
#define FACTRULE_METRICS_H_

#include <cstddef>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "factrule/counterfactual.h"
#include "factrule/model.h"
#include "factrule/scenario.h"

namespace factrule {

struct MetricsReport {
  std::size_t count = 0;
  std::optional<double> accuracy;
  std::optional<double> macro_f1;
  std::vector<double> precision;  // per class, 0 when never predicted
  std::vector<double> recall;     // per class, 0 when absent
  std::size_t k = 5;
  // Fraction of samples whose label is among the top-k ranked classes.
  std::optional<double> mean_recall_at_k;
  // Macro average precision of the per-class score ranking over samples.
  std::optional<double> mean_average_precision;
  // Macro one-vs-rest ROC AUC over classes with both positives and negatives.
  std::optional<double> auc;
  // Fraction of non-risk ground-truth samples predicted as a risk class.
  std::optional<double> false_alarm_rate;
  // Accuracy on the held-out-composition split.
  std::optional<double> compositional_accuracy;
  // Among held-out-composition samples whose fact pattern never occurs in
  // training, the fraction classified correctly.
  std::optional<double> novel_pattern_rate;
  // Fraction of risk-predicted samples with a verified flipping intervention.
  std::optional<double> counterfactual_validity;
  // Fact accuracy at threshold 0.5 against the ground-truth bits.
  std::optional<double> fact_accuracy;
};

// Label-only metrics from posteriors. `posteriors` is count x C row-major.
void ComputeClassification(std::span<const int> labels,
                           std::span<const double> posteriors,
                           const std::vector<ClassInfo>& classes,
                           std::size_t k, MetricsReport* report);

// Mann-Whitney estimate of P(score_pos > score_neg), ties count half.
std::optional<double> BinaryAuc(std::span<const double> scores,
                                std::span<const std::uint8_t> positive);

// Average precision of a ranking (scores descending, ties by index).
std::optional<double> AveragePrecision(std::span<const double> scores,
                                       std::span<const std::uint8_t> positive);

struct EvalOptions {
  std::size_t k = 5;
  bool counterfactual = true;
  SearchOptions search;
  // Stop counterfactual checks after this many risk-predicted samples (0 =
  // all).
  std::size_t counterfactual_limit = 0;
  // Held-out-composition samples and the fact patterns seen in training;
  // both empty leaves CGS and NPR absent.
  std::span<const Scenario> compositional;
  const std::set<std::string>* train_patterns = nullptr;
};

MetricsReport Evaluate(const LogicModel& model,
                       std::span<const Scenario> samples,
                       const EvalOptions& options = {});

// Fact accuracy and label accuracy without the heavier metrics; used for
// per-epoch validation.
struct QuickMetrics {
  double accuracy = 0.0;
  double fact_accuracy = 0.0;
};
QuickMetrics EvaluateQuick(const LogicModel& model,
                           std::span<const Scenario> samples);

std::set<std::string> PatternSet(std::span<const Scenario> samples);

}  // namespace factrule

#endif  // FACTRULE_METRICS_H_
