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

#include "factrule/trainer.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "factrule/metrics.h"

namespace factrule {

namespace {

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::string Snapshot(const LogicModel& model, std::size_t epoch,
                     std::size_t batch, const TrainConfig& config,
                     const std::vector<EpochRecord>& history) {
  std::ostringstream out;
  out.precision(17);
  out << "epoch=" << epoch << " batch=" << batch
      << " lr=" << config.learning_rate << " seed=" << config.seed << "\n";
  for (const ParamGroup& g : model.params().groups()) {
    double norm = 0.0;
    std::size_t bad = 0;
    for (double v : g.value) {
      if (std::isfinite(v)) {
        norm += v * v;
      } else {
        ++bad;
      }
    }
    double gnorm = 0.0;
    for (double v : g.grad) gnorm += std::isfinite(v) ? v * v : 0.0;
    out << g.name << ": |value|=" << std::sqrt(norm)
        << " |grad|=" << std::sqrt(gnorm) << " non_finite=" << bad << "\n";
  }
  if (!history.empty()) {
    out << "last_total=" << history.back().total << "\n";
  }
  return out.str();
}

}  // namespace

void TrainConfig::Validate() const {
  if (epochs == 0) throw ConfigError("epochs must be positive");
  if (warmup_epochs >= epochs) {
    throw ConfigError("warmup epochs must be fewer than total epochs");
  }
  if (batch_size == 0) throw ConfigError("batch size must be positive");
  if (!(learning_rate > 0)) throw ConfigError("learning rate must be positive");
  if (!(fact_weight >= 0)) throw ConfigError("fact weight must be >= 0");
  if (!(sparsity_max >= 0)) throw ConfigError("sparsity weight must be >= 0");
  if (supervision == Supervision::kSemi &&
      !(semi_fraction > 0 && semi_fraction < 1)) {
    throw ConfigError("semi-supervised fraction must lie in (0, 1)");
  }
}

double TrainConfig::SparsityAt(std::size_t epoch) const {
  if (epoch < sparsity_start) return 0.0;
  if (sparsity_ramp == 0) return sparsity_max;
  const double t = static_cast<double>(epoch - sparsity_start) /
                   static_cast<double>(sparsity_ramp);
  return sparsity_max * std::min(1.0, t);
}

double TrainConfig::TemperatureAt(std::size_t epoch, double tau_start,
                                  double tau_end) const {
  if (epoch <= warmup_epochs) return tau_start;
  const std::size_t span = epochs - 1 - warmup_epochs;
  if (span == 0 || epoch >= epochs - 1) return tau_end;
  const double t =
      static_cast<double>(epoch - warmup_epochs) / static_cast<double>(span);
  return tau_start * std::pow(tau_end / tau_start, t);
}

std::vector<std::vector<std::uint8_t>> SupervisionMasks(
    Supervision mode, double fraction, std::size_t count, std::size_t num_facts,
    std::uint64_t seed) {
  std::vector<std::vector<std::uint8_t>> masks(count);
  switch (mode) {
    case Supervision::kFull:
      for (auto& m : masks) m.assign(num_facts, 1);
      break;
    case Supervision::kWeak:
      break;
    case Supervision::kSemi: {
      std::vector<std::size_t> order(count);
      std::iota(order.begin(), order.end(), 0);
      std::mt19937_64 rng(Mix(seed ^ 0x5e111ULL));
      std::shuffle(order.begin(), order.end(), rng);
      const auto keep = static_cast<std::size_t>(
          std::llround(fraction * static_cast<double>(count)));
      for (std::size_t i = 0; i < keep && i < count; ++i) {
        masks[order[i]].assign(num_facts, 1);
      }
      break;
    }
  }
  return masks;
}

std::uint64_t StepSeed(std::uint64_t seed, std::size_t epoch,
                       std::size_t batch) {
  return Mix(Mix(Mix(seed) ^ epoch) ^ batch);
}

LogicModel MakeModel(const GeneratorConfig& generator, const ModelConfig& base,
                     std::uint64_t seed, const InitOptions& init) {
  ModelConfig config = base;
  config.vocabulary = generator.vocabulary;
  config.classes = generator.classes;
  config.feature_dim = generator.feature_dim;
  LogicModel model(std::move(config));
  model.Initialize(seed, init);
  return model;
}

std::vector<ValidationPoint> ValidationPoints(
    const LogicModel& model, std::span<const Scenario> samples) {
  std::vector<ValidationPoint> out;
  out.reserve(samples.size());
  const HeadParams heads = model.heads();
  for (const auto& s : samples) {
    out.push_back(
        {BuildFactGraph(s.views, heads, model.config().fusion).confidence,
         s.label});
  }
  return out;
}

std::vector<EpochRecord> Train(LogicModel& model,
                               std::span<const Scenario> train,
                               std::span<const Scenario> validation,
                               const TrainConfig& config,
                               const EpochCallback& on_epoch) {
  config.Validate();
  if (train.empty()) throw ConfigError("training set is empty");
  const std::size_t n = model.num_facts();
  for (const auto& s : train) {
    if (s.facts.size() != n) {
      throw ConfigError("training sample fact count does not match model");
    }
  }

  const auto masks = SupervisionMasks(config.supervision, config.semi_fraction,
                                      train.size(), n, config.seed);
  const std::size_t steps_per_epoch =
      (train.size() + config.batch_size - 1) / config.batch_size;
  AdamW optimizer(model.params(), config.adam,
                  LrSchedule{config.learning_rate,
                             static_cast<double>(config.warmup_epochs),
                             static_cast<double>(config.epochs)},
                  static_cast<std::int64_t>(steps_per_epoch));
  const auto& fusion_groups = LogicModel::FusionGroups();
  const std::set<std::string> warmup_set(fusion_groups.begin(),
                                         fusion_groups.end());
  const std::set<std::string> all_groups;

  std::span<double> rule_weight = model.params().Get(kRuleWeight).value;
  if (config.nonnegative_rule_weights) {
    for (double& w : rule_weight) w = std::abs(w);
  }

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(Mix(config.seed ^ 0x5fu));
  std::vector<LabeledSample> batch;
  std::vector<EpochRecord> history;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const bool warmup = epoch < config.warmup_epochs;
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.phase = warmup ? "warmup" : "joint";
    rec.learning_rate = optimizer.NextLr();
    rec.temperature = config.TemperatureAt(epoch, model.config().tau_start,
                                           model.config().tau_end);
    rec.sparsity_weight = warmup ? 0.0 : config.SparsityAt(epoch);

    LossConfig loss;
    loss.classification_weight = warmup ? 0.0 : 1.0;
    loss.fact_weight = config.fact_weight;
    loss.sparsity_weight = rec.sparsity_weight;
    loss.sparsity_form = config.sparsity_form;
    StepOptions step;
    step.selection.temperature = rec.temperature;
    step.selection.mode = config.sampled_selection
                              ? SelectionMode::kSampled
                              : SelectionMode::kDeterministic;
    step.selection.hard_forward = config.hard_forward;

    bool any_fact = false;
    double sum_cls = 0, sum_fact = 0, sum_sp = 0, sum_total = 0;
    for (std::size_t b = 0; b < steps_per_epoch; ++b) {
      batch.clear();
      const std::size_t lo = b * config.batch_size;
      const std::size_t hi = std::min(train.size(), lo + config.batch_size);
      for (std::size_t i = lo; i < hi; ++i) {
        const Scenario& s = train[order[i]];
        batch.push_back({s.views, s.facts, masks[order[i]], s.label});
      }
      step.seed = StepSeed(config.seed, epoch, b);
      try {
        const LossComponents c = ForwardBackward(model, batch, loss, step);
        optimizer.Step(model.params(), warmup ? warmup_set : all_groups);
        if (config.nonnegative_rule_weights) {
          for (double& w : rule_weight) w = std::max(w, 0.0);
        }
        model.params().CheckFiniteValues();
        any_fact = any_fact || c.fact_present;
        sum_cls += c.classification;
        sum_fact += c.fact;
        sum_sp += c.sparsity;
        sum_total += c.total;
      } catch (const NumericalError& e) {
        throw TrainingDiverged(e.tensor(), e.what(),
                               Snapshot(model, epoch, b, config, history));
      }
    }
    const double inv = 1.0 / static_cast<double>(steps_per_epoch);
    rec.classification = sum_cls * inv;
    if (any_fact && config.fact_weight != 0.0) rec.fact = sum_fact * inv;
    rec.sparsity = sum_sp * inv;
    rec.total = sum_total * inv;

    if (!validation.empty()) {
      const QuickMetrics q = EvaluateQuick(model, validation);
      rec.val_accuracy = q.accuracy;
      rec.val_fact_accuracy = q.fact_accuracy;
      if (config.track_rules && !warmup) {
        const auto points = ValidationPoints(model, validation);
        const RuleSet rules = ExtractRules(model, points, config.rules);
        rec.active_rules = rules.rules.size();
        rec.risk_rules = CountRiskRules(rules, model.config().classes);
      }
    }
    history.push_back(rec);
    if (on_epoch) on_epoch(rec);
  }
  return history;
}

}  // namespace factrule
