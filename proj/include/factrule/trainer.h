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

#ifndef FACTRULE_TRAINER_H_
#define FACTRULE_TRAINER_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "factrule/errors.h"
#include "factrule/model.h"
#include "factrule/optimizer.h"
#include "factrule/rules.h"
#include "factrule/scenario.h"

namespace factrule {

enum class Supervision { kFull, kWeak, kSemi };

struct TrainConfig {
  std::size_t epochs = 100;
  // Perception warmup: fusion heads only, fact-grounding loss only.
  std::size_t warmup_epochs = 5;
  std::size_t batch_size = 32;
  double learning_rate = 2e-2;
  AdamWConfig adam;
  double fact_weight = 1.0;
  // Sparsity coefficient: 0 before sparsity_start, then a linear ramp over
  // sparsity_ramp epochs up to sparsity_max.
  double sparsity_max = 0.01;
  std::size_t sparsity_start = 20;
  std::size_t sparsity_ramp = 20;
  SparsityForm sparsity_form = SparsityForm::kEntropy;
  Supervision supervision = Supervision::kFull;
  double semi_fraction = 0.2;
  // Gumbel sampling during training; deterministic selection otherwise.
  bool sampled_selection = true;
  bool hard_forward = true;
  // Keeps rule weights >= 0 (projection after every step, absolute value at
  // the start) so each rule is positive evidence for its classes.
  bool nonnegative_rule_weights = true;
  std::uint64_t seed = 1;
  InitOptions init;
  // Rule extraction used for the per-epoch active-rule count.
  ExtractOptions rules;
  bool track_rules = true;

  // Throws ConfigError on invalid values.
  void Validate() const;
  // Sparsity coefficient used during `epoch` (0-based).
  double SparsityAt(std::size_t epoch) const;
  // Selection temperature during `epoch`: tau_start for warmup epochs, then
  // a geometric anneal reaching tau_end at the last epoch.
  double TemperatureAt(std::size_t epoch, double tau_start,
                       double tau_end) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  std::string phase;  // "warmup" or "joint"
  double learning_rate = 0.0;
  double temperature = 0.0;
  double sparsity_weight = 0.0;
  // Batch-mean weighted components averaged over the epoch.
  double classification = 0.0;
  std::optional<double> fact;  // absent when no fact labels were used
  double sparsity = 0.0;
  double total = 0.0;
  std::optional<std::size_t> active_rules;
  std::optional<std::size_t> risk_rules;
  std::optional<double> val_accuracy;
  std::optional<double> val_fact_accuracy;
};

// Per-sample fact-label masks for a supervision regime. Full: all ones;
// weak: empty (no fact labels); semi: a seeded fraction of samples get all
// ones, the rest empty.
std::vector<std::vector<std::uint8_t>> SupervisionMasks(
    Supervision mode, double fraction, std::size_t count, std::size_t num_facts,
    std::uint64_t seed);

// Seed for the Gumbel draw of one optimizer step.
std::uint64_t StepSeed(std::uint64_t seed, std::size_t epoch,
                       std::size_t batch);

// Raised when training produces a non-finite value. Carries a textual
// snapshot of the state at the failure.
class TrainingDiverged : public NumericalError {
 public:
  TrainingDiverged(const std::string& tensor, const std::string& what,
                   std::string snapshot)
      : NumericalError(tensor, what), snapshot_(std::move(snapshot)) {}
  const std::string& snapshot() const { return snapshot_; }

 private:
  std::string snapshot_;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Trains `model` in place (it must already be initialized). Returns one
// record per epoch. `validation` may be empty, in which case validation
// metrics and rule counts are absent.
std::vector<EpochRecord> Train(LogicModel& model,
                               std::span<const Scenario> train,
                               std::span<const Scenario> validation,
                               const TrainConfig& config,
                               const EpochCallback& on_epoch = {});

// Builds and initializes a model for a generator config.
LogicModel MakeModel(const GeneratorConfig& generator, const ModelConfig& base,
                     std::uint64_t seed, const InitOptions& init = {});

// Validation points (fused confidences and labels) for rule extraction.
std::vector<ValidationPoint> ValidationPoints(const LogicModel& model,
                                              std::span<const Scenario> samples);

}  // namespace factrule

#endif  // FACTRULE_TRAINER_H_
