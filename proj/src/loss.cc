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

#include "factrule/loss.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "factrule/errors.h"

namespace factrule {

double BinaryCrossEntropy(double confidence, int target) {
  const double c = std::clamp(confidence, kBceClip, 1.0 - kBceClip);
  return target ? -std::log(c) : -std::log(1.0 - c);
}

double BinaryCrossEntropyGrad(double confidence, int target) {
  if (confidence < kBceClip || confidence > 1.0 - kBceClip) return 0.0;
  return target ? -1.0 / confidence : 1.0 / (1.0 - confidence);
}

double SelectionSparsity(const RuleStructure& structure, SparsityForm form) {
  if (form == SparsityForm::kEntropy) {
    return SelectionEntropy(structure, 0.0, {});
  }
  double l1 = 0.0;
  for (double g : structure.soft) l1 += std::abs(g);
  return l1;
}

LossComponents ComputeLoss(std::span<const double> posterior, int label,
                           std::span<const double> confidence,
                           std::span<const std::uint8_t> facts,
                           std::span<const std::uint8_t> fact_mask,
                           const RuleStructure& structure,
                           std::span<const double> rule_weight,
                           const LossConfig& config) {
  if (label < 0 || static_cast<std::size_t>(label) >= posterior.size()) {
    throw ConfigError("label " + std::to_string(label) + " out of range");
  }
  if (config.calibration_weight != 0.0) {
    throw ConfigError("calibration loss is not defined; weight must be 0");
  }
  LossComponents out;
  const double p = std::max(posterior[label],
                            std::numeric_limits<double>::min());
  out.classification = config.classification_weight * -std::log(p);
  if (!fact_mask.empty()) {
    if (fact_mask.size() != confidence.size() ||
        facts.size() != confidence.size()) {
      throw ConfigError("fact labels/mask do not match fact count");
    }
    double fact = 0.0;
    for (std::size_t k = 0; k < confidence.size(); ++k) {
      if (!fact_mask[k]) continue;
      out.fact_present = true;
      fact += BinaryCrossEntropy(confidence[k], facts[k]);
    }
    out.fact = config.fact_weight * fact;
  }
  if (config.sparsity_weight != 0.0) {
    double l1 = 0.0;
    for (double w : rule_weight) l1 += std::abs(w);
    out.sparsity = config.sparsity_weight *
                   (SelectionSparsity(structure, config.sparsity_form) + l1);
  }
  out.total = out.classification + out.fact + out.sparsity;
  return out;
}

}  // namespace factrule
