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

#include "factrule/counterfactual.h"

#include <algorithm>

#include "factrule/errors.h"

namespace factrule {

namespace {

std::size_t ArgMax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

CounterfactualResult MakeResult(const Reasoner& reasoner,
                                std::span<const double> confidence,
                                const std::vector<double>& original,
                                std::vector<FactIntervention> interventions,
                                bool exact) {
  const auto& classes = reasoner.model().config().classes;
  std::sort(interventions.begin(), interventions.end(),
            [](const FactIntervention& a, const FactIntervention& b) {
              return a.fact < b.fact;
            });
  CounterfactualResult r;
  r.original_posterior = original;
  r.original_label = ArgMax(original);
  r.new_posterior =
      reasoner.Posterior(ApplyInterventions(confidence, interventions));
  r.new_label = ArgMax(r.new_posterior);
  r.interventions = std::move(interventions);
  r.risk_before = RiskProbability(classes, original);
  r.risk_after = RiskProbability(classes, r.new_posterior);
  r.exact = exact;
  if (r.new_label == r.original_label || r.interventions.empty()) {
    throw std::logic_error("counterfactual result does not flip the label");
  }
  return r;
}

void CheckInput(const Reasoner& reasoner, std::span<const double> confidence) {
  if (confidence.size() != reasoner.model().num_facts()) {
    throw ConfigError("fact vector length does not match the model");
  }
}

}  // namespace

double CounterfactualResult::risk_change_percent() const {
  if (risk_before == 0.0) return 0.0;
  return 100.0 * (risk_after - risk_before) / risk_before;
}

std::vector<double> ApplyInterventions(
    std::span<const double> confidence,
    std::span<const FactIntervention> interventions) {
  std::vector<double> c(confidence.begin(), confidence.end());
  for (const auto& iv : interventions) {
    c.at(iv.fact) = iv.value ? 1.0 : 0.0;
  }
  return c;
}

double RiskProbability(const std::vector<ClassInfo>& classes,
                       std::span<const double> posterior) {
  double r = 0.0;
  for (std::size_t y = 0; y < classes.size() && y < posterior.size(); ++y) {
    if (classes[y].risk) r += posterior[y];
  }
  return r;
}

CounterfactualResult ExactSearch(const Reasoner& reasoner,
                                 std::span<const double> confidence,
                                 const SearchOptions& options) {
  CheckInput(reasoner, confidence);
  const std::size_t n = confidence.size();
  if (n > options.exact_cap && !options.force_exact) {
    throw ConfigError("exact search limited to " +
                      std::to_string(options.exact_cap) +
                      " facts; use greedy search or force exact");
  }
  const std::vector<double> original = reasoner.Posterior(confidence);
  const std::size_t label = ArgMax(original);
  std::vector<double> work(confidence.begin(), confidence.end());
  std::vector<std::size_t> subset;
  std::size_t evaluations = 0;

  for (std::size_t k = 1; k <= std::min(options.max_card, n); ++k) {
    bool found = false;
    double best_margin = 0.0;
    std::vector<FactIntervention> best;
    // Lexicographic k-subsets.
    subset.resize(k);
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    for (;;) {
      for (std::uint32_t values = 0; values < (1U << k); ++values) {
        bool identity = false;
        for (std::size_t i = 0; i < k; ++i) {
          // Bit (k - 1 - i) so that value patterns enumerate with the lowest
          // fact varying slowest.
          const std::uint8_t v = (values >> (k - 1 - i)) & 1U;
          const double target = v ? 1.0 : 0.0;
          if (confidence[subset[i]] == target) identity = true;
          work[subset[i]] = target;
        }
        if (!identity) {
          if (options.deadline && (evaluations++ & 0xFF) == 0 &&
              std::chrono::steady_clock::now() > *options.deadline) {
            throw SearchTimeout("exact counterfactual search timed out");
          }
          const std::vector<double> p = reasoner.Posterior(work);
          const std::size_t y = ArgMax(p);
          if (y != label) {
            const double margin = p[y] - p[label];
            if (!found || margin > best_margin) {
              found = true;
              best_margin = margin;
              best.clear();
              for (std::size_t i = 0; i < k; ++i) {
                best.push_back({subset[i], static_cast<std::uint8_t>(
                                               (values >> (k - 1 - i)) & 1U)});
              }
            }
          }
        }
      }
      for (std::size_t i = 0; i < k; ++i) {
        work[subset[i]] = confidence[subset[i]];
      }
      // Next subset.
      std::size_t i = k;
      while (i > 0 && subset[i - 1] == n - k + (i - 1)) --i;
      if (i == 0) break;
      ++subset[i - 1];
      for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
    if (found) {
      return MakeResult(reasoner, confidence, original, std::move(best), true);
    }
  }
  throw NoCounterfactual("no intervention of cardinality <= " +
                         std::to_string(options.max_card) +
                         " changes the prediction");
}

CounterfactualResult GreedySearch(const Reasoner& reasoner,
                                  std::span<const double> confidence,
                                  const SearchOptions& options) {
  CheckInput(reasoner, confidence);
  const std::size_t n = confidence.size();
  const std::vector<double> original = reasoner.Posterior(confidence);
  const std::size_t label = ArgMax(original);
  std::vector<double> current(confidence.begin(), confidence.end());
  std::vector<std::uint8_t> used(n, 0);
  std::vector<FactIntervention> chosen;
  while (chosen.size() < std::min(options.max_card, n)) {
    bool have = false;
    FactIntervention best_iv;
    double best_p = 0.0;
    std::size_t best_label = label;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      for (std::uint8_t v : {std::uint8_t{0}, std::uint8_t{1}}) {
        const double target = v ? 1.0 : 0.0;
        if (current[i] == target) continue;
        const double saved = current[i];
        current[i] = target;
        const std::vector<double> p = reasoner.Posterior(current);
        current[i] = saved;
        if (!have || p[label] < best_p) {
          have = true;
          best_p = p[label];
          best_iv = {i, v};
          best_label = ArgMax(p);
        }
      }
    }
    if (!have) break;
    used[best_iv.fact] = 1;
    current[best_iv.fact] = best_iv.value ? 1.0 : 0.0;
    chosen.push_back(best_iv);
    if (best_label != label) {
      return MakeResult(reasoner, confidence, original, std::move(chosen),
                        false);
    }
  }
  throw NoCounterfactual("greedy search found no flip within cardinality " +
                         std::to_string(options.max_card));
}

std::vector<SensitivityEntry> SensitivityReport(
    const Reasoner& reasoner, std::span<const double> confidence) {
  CheckInput(reasoner, confidence);
  const auto& classes = reasoner.model().config().classes;
  const std::vector<double> original = reasoner.Posterior(confidence);
  const std::size_t label = ArgMax(original);
  const double risk = RiskProbability(classes, original);
  std::vector<SensitivityEntry> out;
  std::vector<double> work(confidence.begin(), confidence.end());
  for (std::size_t i = 0; i < confidence.size(); ++i) {
    for (std::uint8_t v : {std::uint8_t{0}, std::uint8_t{1}}) {
      const double target = v ? 1.0 : 0.0;
      if (confidence[i] == target) continue;
      work[i] = target;
      SensitivityEntry e;
      e.intervention = {i, v};
      e.posterior = reasoner.Posterior(work);
      e.label = ArgMax(e.posterior);
      e.label_changed = e.label != label;
      e.risk_delta = RiskProbability(classes, e.posterior) - risk;
      out.push_back(std::move(e));
      work[i] = confidence[i];
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SensitivityEntry& a, const SensitivityEntry& b) {
                     return a.risk_delta < b.risk_delta;
                   });
  return out;
}

}  // namespace factrule
