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

#ifndef FACTRULE_LOSS_H_
#define FACTRULE_LOSS_H_

#include <cstdint>
#include <span>

#include "factrule/logic_layer.h"
#include "factrule/model.h"

namespace factrule {

inline constexpr double kBceClip = 1e-7;

// Binary cross-entropy with the confidence clipped to [1e-7, 1 - 1e-7].
double BinaryCrossEntropy(double confidence, int target);

// d BCE / d confidence; zero where the clip is active.
double BinaryCrossEntropyGrad(double confidence, int target);

// Joint objective for one sample:
//   w_ce * CE + fact_weight * sum_k BCE(c_k, p_k) + sparsity_weight * S
// where S is the selection sparsity of `structure` plus ||rule_weight||_1.
// The fact term covers facts with mask 1 only; an empty mask means absent.
LossComponents ComputeLoss(std::span<const double> posterior, int label,
                           std::span<const double> confidence,
                           std::span<const std::uint8_t> facts,
                           std::span<const std::uint8_t> fact_mask,
                           const RuleStructure& structure,
                           std::span<const double> rule_weight,
                           const LossConfig& config);

// Selection sparsity term alone (entropy or literal L1 per config).
double SelectionSparsity(const RuleStructure& structure, SparsityForm form);

}  // namespace factrule

#endif  // FACTRULE_LOSS_H_
