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

#ifndef FACTRULE_SPLIT_H_
#define FACTRULE_SPLIT_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "factrule/fact_fusion.h"
#include "factrule/scenario.h"

namespace factrule {

// Conjunction of fact assignments such as rail_down=1,edge_sitting=1.
struct HoldoutPattern {
  std::vector<std::pair<std::size_t, std::uint8_t>> assignments;

  bool Matches(std::span<const std::uint8_t> facts) const;
};

// Parses "a=1,b=0;c=1" (patterns separated by ';'). Throws ConfigError on
// unknown ids, values other than 0/1, or an empty pattern.
std::vector<HoldoutPattern> ParseHoldout(const std::string& text,
                                         const FactVocabulary& vocabulary);

std::string FormatHoldout(const std::vector<HoldoutPattern>& patterns,
                          const FactVocabulary& vocabulary);

struct CompositionalSplit {
  std::vector<std::size_t> train;  // indices into the input samples
  std::vector<std::size_t> test;   // samples matching any pattern
};

// Moves every sample matching any pattern (union) to the test side. Throws
// ConfigError when the remaining training data loses every sample of a class
// that the input contains, or loses either value of some fact.
CompositionalSplit SplitCompositional(std::span<const Scenario> samples,
                                      const std::vector<HoldoutPattern>& patterns,
                                      std::size_t num_classes);

// Default holdout for the reference scenario.
inline constexpr char kDefaultHoldout[] =
    "rail_down=1,edge_sitting=1,caregiver_near=1";

}  // namespace factrule

#endif  // FACTRULE_SPLIT_H_
