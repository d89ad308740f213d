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

#ifndef FACTRULE_IO_H_
#define FACTRULE_IO_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "factrule/counterfactual.h"
#include "factrule/explain.h"
#include "factrule/metrics.h"
#include "factrule/model.h"
#include "factrule/rules.h"
#include "factrule/scenario.h"
#include "factrule/trainer.h"
#include "json.hpp"

namespace factrule {

using Json = nlohmann::json;

inline constexpr char kCheckpointFormat[] = "factrule-checkpoint";
inline constexpr int kCheckpointVersion = 1;
inline constexpr char kRuleSetFormat[] = "factrule-rules";
inline constexpr int kRuleSetVersion = 1;

std::string ReadTextFile(const std::string& path);
void WriteTextFile(const std::string& path, const std::string& text);
// Parses JSON, mapping syntax errors to FormatError naming `what`.
Json ParseJson(const std::string& text, const std::string& what);

Json ToJson(const FactVocabulary& vocabulary);
FactVocabulary VocabularyFromJson(const Json& j);
Json ToJson(const std::vector<ClassInfo>& classes);
std::vector<ClassInfo> ClassesFromJson(const Json& j);

Json ToJson(const GeneratorConfig& config);
// Missing fields take the reference scenario's values.
GeneratorConfig GeneratorConfigFromJson(const Json& j);

Json ToJson(const Scenario& sample);
Scenario ScenarioFromJson(const Json& j);
Json ToJson(const DatasetManifest& manifest);

// Dataset directory layout: config.json, samples.jsonl, manifest.json.
void WriteDataset(const std::string& dir, const Dataset& dataset);
Dataset ReadDataset(const std::string& dir);

// Model hyperparameters (rules, slots, temperatures, fusion ablation); the
// vocabulary, classes and feature size come from the data.
Json ModelHyperToJson(const ModelConfig& config);
ModelConfig ModelHyperFromJson(const Json& j);

Json ToJson(const TrainConfig& config);
TrainConfig TrainConfigFromJson(const Json& j);
Json ToJson(const EpochRecord& record);

struct Checkpoint {
  LogicModel model;
  std::optional<TrainConfig> train;
  std::string dataset_hash;
  Json history_digest;
  std::optional<RuleSet> rules;
};

Json CheckpointToJson(const LogicModel& model, const TrainConfig* train,
                      const std::string& dataset_hash,
                      const std::vector<EpochRecord>& history,
                      const RuleSet* rules);
// Throws FormatError on unknown format/version or inconsistent shapes.
Checkpoint CheckpointFromJson(const Json& j);
void SaveCheckpoint(const std::string& path, const Json& checkpoint);
Checkpoint LoadCheckpoint(const std::string& path);

Json ToJson(const RuleSet& rules, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes);
RuleSet RuleSetFromJson(const Json& j, const FactVocabulary& vocabulary,
                        const std::vector<ClassInfo>& classes);

Json ToJson(const MetricsReport& report, const std::vector<ClassInfo>& classes);

Json ToJson(const CounterfactualResult& result, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes);
Json ToJson(const SensitivityEntry& entry, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes);
Json ToJson(const ExplanationPayload& payload, const FactVocabulary& vocabulary,
            const std::vector<ClassInfo>& classes);

// Fact confidences from either an array in vocabulary order or an object
// keyed by fact id (missing ids are an error). Throws FormatError for
// malformed values and VocabularyMismatch for wrong length or unknown ids.
std::vector<double> ConfidencesFromJson(const Json& j,
                                        const FactVocabulary& vocabulary);

// Per-view observations: [{"features": [...], "visible": [...]}, ...].
std::vector<ViewObservation> ViewsFromJson(const Json& j, std::size_t num_facts,
                                           std::size_t feature_dim);

}  // namespace factrule

#endif  // FACTRULE_IO_H_
