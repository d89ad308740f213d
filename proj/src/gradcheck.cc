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

#include "factrule/gradcheck.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "factrule/errors.h"

namespace factrule {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& g : groups) w = std::max(w, g.relative_error);
  return w;
}

std::vector<std::vector<double>> NumericGradients(
    LogicModel& model, std::span<const LabeledSample> batch,
    const LossConfig& loss, const StepOptions& step, double h) {
  if (!(h > 0)) throw ConfigError("finite-difference step must be positive");
  model.params().CheckFiniteValues();
  std::vector<std::vector<double>> out;
  for (auto& group : model.params().groups()) {
    std::vector<double> numeric(group.size());
    for (std::size_t i = 0; i < group.size(); ++i) {
      const double saved = group.value[i];
      group.value[i] = saved + h;
      const double plus = ForwardBackward(model, batch, loss, step).total;
      group.value[i] = saved - h;
      const double minus = ForwardBackward(model, batch, loss, step).total;
      group.value[i] = saved;
      numeric[i] = (plus - minus) / (2.0 * h);
    }
    out.push_back(std::move(numeric));
  }
  return out;
}

GradCheckReport CompareGradients(
    const ParamStore& analytic,
    const std::vector<std::vector<double>>& numeric, double tol) {
  const auto& groups = analytic.groups();
  if (groups.size() != numeric.size()) {
    throw ConfigError("numeric gradients do not match parameter layout");
  }
  GradCheckReport report;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    GroupGradError e;
    e.group = groups[gi].name;
    for (std::size_t i = 0; i < groups[gi].size(); ++i) {
      e.max_abs_diff = std::max(e.max_abs_diff,
                                std::abs(groups[gi].grad[i] - numeric[gi][i]));
      e.max_numeric = std::max(e.max_numeric, std::abs(numeric[gi][i]));
    }
    e.relative_error = e.max_abs_diff / std::max(e.max_numeric, 1e-8);
    e.passed = e.relative_error < tol;
    report.passed = report.passed && e.passed;
    report.groups.push_back(std::move(e));
  }
  return report;
}

GradCheckReport FiniteDiffCheck(LogicModel& model,
                                std::span<const LabeledSample> batch,
                                const LossConfig& loss, const StepOptions& step,
                                double h, double tol) {
  auto numeric = NumericGradients(model, batch, loss, step, h);
  ForwardBackward(model, batch, loss, step);
  return CompareGradients(model.params(), numeric, tol);
}

std::vector<LabeledSample> GradCheckProblem::Batch() const {
  std::vector<LabeledSample> batch;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    batch.push_back(LabeledSample{views[i], facts[i], masks[i], labels[i]});
  }
  return batch;
}

namespace {

ModelConfig RandomConfig(std::mt19937_64& rng) {
  auto pick = [&](int lo, int hi) {
    return static_cast<std::size_t>(
        std::uniform_int_distribution<int>(lo, hi)(rng));
  };
  const std::size_t n = pick(2, 8);
  ModelConfig cfg;
  std::vector<FactDescriptor> facts;
  for (std::size_t k = 0; k < n; ++k) {
    facts.push_back({"f" + std::to_string(k), "fact " + std::to_string(k)});
  }
  cfg.vocabulary = FactVocabulary(std::move(facts));
  const std::size_t c = pick(2, 4);
  for (std::size_t y = 0; y < c; ++y) {
    cfg.classes.push_back({"class" + std::to_string(y), y + 1 == c});
  }
  cfg.feature_dim = pick(2, 6);
  cfg.num_rules = pick(1, 4);
  cfg.num_slots = pick(1, 3);
  return cfg;
}

}  // namespace

GradCheckProblem RandomGradCheckProblem(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GradCheckProblem p{LogicModel(RandomConfig(rng)), {}, {}, {}, {}, {}, {}};
  const auto& cfg = p.model.config();
  std::normal_distribution<double> normal(0.0, 1.0);
  InitOptions init;
  init.head_scale = 0.5;
  init.selection_scale = 1.0;
  init.rule_weight_scale = 1.5;
  p.model.Initialize(rng(), init);
  for (double& x : p.model.params().Get(kNegation).value) x = normal(rng);
  for (double& x : p.model.params().Get(kClassBias).value) x = 0.5 * normal(rng);
  for (double& x : p.model.params().Get(kPredBias).value) x = 0.3 * normal(rng);
  // Keep rule weights clear of the |w| kink.
  for (double& w : p.model.params().Get(kRuleWeight).value) {
    if (std::abs(w) < 0.05) w = w < 0 ? -0.05 : 0.05;
  }

  const std::size_t views =
      std::uniform_int_distribution<std::size_t>(1, 3)(rng);
  const std::size_t batch = 3;
  std::bernoulli_distribution coin(0.5), keep(0.7);
  for (std::size_t b = 0; b < batch; ++b) {
    std::vector<ViewObservation> obs(views);
    for (auto& v : obs) {
      v.features.resize(cfg.feature_dim);
      for (double& x : v.features) x = normal(rng);
      v.visible.assign(cfg.vocabulary.size(), 1);
    }
    p.views.push_back(std::move(obs));
    std::vector<std::uint8_t> f(cfg.vocabulary.size()), m(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
      f[k] = coin(rng);
      m[k] = keep(rng);
    }
    p.facts.push_back(std::move(f));
    p.masks.push_back(std::move(m));
    p.labels.push_back(std::uniform_int_distribution<int>(
        0, static_cast<int>(cfg.classes.size()) - 1)(rng));
  }
  p.loss.fact_weight = 1.0;
  p.loss.sparsity_weight = 0.05;
  p.step.selection.mode = SelectionMode::kSampled;
  p.step.selection.temperature =
      std::uniform_real_distribution<double>(0.5, 1.5)(rng);
  p.step.seed = rng();
  return p;
}

}  // namespace factrule
