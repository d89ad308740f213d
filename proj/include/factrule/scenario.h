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

#ifndef FACTRULE_SCENARIO_H_
#define FACTRULE_SCENARIO_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "factrule/fact_fusion.h"
#include "factrule/model.h"

namespace factrule {

// Conjunction over fact indices that labels a sample with `target`.
struct GroundTruthRule {
  std::vector<std::size_t> positive;
  std::vector<std::size_t> negated;
  std::size_t target = 0;
  int priority = 0;

  bool Fires(std::span<const std::uint8_t> facts) const;
};

// P(child = 1) depends on a single earlier-sampled parent.
struct FactDependency {
  std::size_t child = 0;
  std::size_t parent = 0;
  double p_if_parent = 0.5;
  double p_if_not_parent = 0.5;
};

struct GeneratorConfig {
  FactVocabulary vocabulary;
  std::vector<ClassInfo> classes;
  std::size_t default_class = 0;
  std::size_t num_views = 3;
  std::size_t feature_dim = 16;
  // Marginal prior for facts without a dependency.
  std::vector<double> prior;
  std::vector<FactDependency> dependencies;
  // Occlusion probability, either one value for every (fact, view) or an
  // N x V row-major table.
  double occlusion = 0.2;
  std::vector<double> occlusion_table;
  bool allow_total_occlusion = false;
  double observation_noise = 0.2;
  double label_noise = 0.05;
  std::uint64_t seed = 1;
  std::vector<GroundTruthRule> rules;

  // Throws ConfigError describing the first violated invariant.
  void Validate() const;
  double OcclusionAt(std::size_t fact, std::size_t view) const;
};

// The reference clinical scenario: 8 facts, 3 views, 4 classes.
GeneratorConfig Clinic8Config();

struct Scenario {
  std::uint64_t id = 0;
  std::vector<std::uint8_t> facts;
  int label = 0;
  std::vector<ViewObservation> views;
};

// Fixed seeded embedding: D x 2N, orthonormal columns when D >= 2N.
std::vector<double> FeatureEmbedding(const GeneratorConfig& config);

Scenario SampleScenario(const GeneratorConfig& config,
                        std::span<const double> embedding,
                        std::mt19937_64& rng);

// Deterministic label function of the generator (highest priority firing
// rule, list order breaking ties; default class if none fires).
std::size_t BayesOracle(const GeneratorConfig& config,
                        std::span<const std::uint8_t> facts);

// Prior probability of a complete fact assignment.
double AssignmentProbability(const GeneratorConfig& config,
                             std::span<const std::uint8_t> facts);

// Exact class distribution including label noise, by enumerating 2^N.
std::vector<double> ClassDistribution(const GeneratorConfig& config);

std::string FactPattern(std::span<const std::uint8_t> facts);

struct DatasetManifest {
  std::string config_hash;
  std::size_t count = 0;
  std::vector<std::size_t> class_histogram;
  // Bit pattern (fact order, '0'/'1') -> number of samples.
  std::map<std::string, std::size_t> census;
};

struct Dataset {
  GeneratorConfig config;
  std::vector<Scenario> samples;
};

// Sample i uses an rng stream derived from (config.seed, first_id + i).
Dataset GenerateDataset(const GeneratorConfig& config, std::size_t count,
                        std::uint64_t first_id = 0);

DatasetManifest BuildManifest(const GeneratorConfig& config,
                              std::span<const Scenario> samples);

// Stable FNV-1a digest of the canonical config text.
std::string ConfigHash(const GeneratorConfig& config);
std::string CanonicalConfigText(const GeneratorConfig& config);

std::mt19937_64 SampleStream(std::uint64_t seed, std::uint64_t index);

}  // namespace factrule

#endif  // FACTRULE_SCENARIO_H_
