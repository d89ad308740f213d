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

#ifndef FACTRULE_GRADCHECK_H_
#define FACTRULE_GRADCHECK_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "factrule/model.h"

namespace factrule {

// Error of one parameter group: max_i |analytic_i - numeric_i| divided by
// max(max_i |numeric_i|, 1e-8).
struct GroupGradError {
  std::string group;
  double max_abs_diff = 0.0;
  double max_numeric = 0.0;
  double relative_error = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GroupGradError> groups;
  bool passed = true;

  double worst() const;
};

// Central differences of ForwardBackward's total loss, one vector per group.
std::vector<std::vector<double>> NumericGradients(
    LogicModel& model, std::span<const LabeledSample> batch,
    const LossConfig& loss, const StepOptions& step, double h);

GradCheckReport CompareGradients(
    const ParamStore& analytic,
    const std::vector<std::vector<double>>& numeric, double tol);

GradCheckReport FiniteDiffCheck(LogicModel& model,
                                std::span<const LabeledSample> batch,
                                const LossConfig& loss, const StepOptions& step,
                                double h, double tol);

// A self-contained random problem for gradient checking.
struct GradCheckProblem {
  LogicModel model;
  std::vector<std::vector<ViewObservation>> views;
  std::vector<std::vector<std::uint8_t>> facts;
  std::vector<std::vector<std::uint8_t>> masks;
  std::vector<int> labels;
  LossConfig loss;
  StepOptions step;

  std::vector<LabeledSample> Batch() const;
};

// Seeded configuration with N <= 8, M <= 4, L <= 3, V <= 3, C <= 4.
GradCheckProblem RandomGradCheckProblem(std::uint64_t seed);

}  // namespace factrule

#endif  // FACTRULE_GRADCHECK_H_
