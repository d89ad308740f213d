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

#include "factrule/metrics.h"

#include <algorithm>
#include <numeric>

#include "factrule/errors.h"

namespace factrule {

namespace {

std::size_t ArgMax(std::span<const double> v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) -
                                  v.begin());
}

}  // namespace

std::optional<double> BinaryAuc(std::span<const double> scores,
                                std::span<const std::uint8_t> positive) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Average ranks over tie groups.
  double pos_rank_sum = 0.0;
  std::size_t num_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (positive[order[t]]) {
        pos_rank_sum += rank;
        ++num_pos;
      }
    }
    i = j;
  }
  const std::size_t num_neg = scores.size() - num_pos;
  if (num_pos == 0 || num_neg == 0) return std::nullopt;
  const double np = static_cast<double>(num_pos);
  return (pos_rank_sum - np * (np + 1) / 2) /
         (np * static_cast<double>(num_neg));
}

std::optional<double> AveragePrecision(std::span<const double> scores,
                                       std::span<const std::uint8_t> positive) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  std::size_t hits = 0;
  double sum = 0.0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!positive[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

void ComputeClassification(std::span<const int> labels,
                           std::span<const double> posteriors,
                           const std::vector<ClassInfo>& classes,
                           std::size_t k, MetricsReport* report) {
  const std::size_t nc = classes.size();
  const std::size_t count = labels.size();
  if (posteriors.size() != count * nc) {
    throw ConfigError("posterior matrix does not match labels x classes");
  }
  report->count = count;
  report->k = k;
  report->precision.assign(nc, 0.0);
  report->recall.assign(nc, 0.0);
  if (count == 0) return;

  std::vector<std::size_t> tp(nc, 0), predicted(nc, 0), actual(nc, 0);
  std::size_t correct = 0, topk = 0, non_risk = 0, alarms = 0;
  const std::size_t kk = std::min(k, nc);
  for (std::size_t i = 0; i < count; ++i) {
    const auto p = posteriors.subspan(i * nc, nc);
    const std::size_t y = static_cast<std::size_t>(labels[i]);
    const std::size_t yhat = ArgMax(p);
    ++predicted[yhat];
    ++actual[y];
    if (y == yhat) {
      ++correct;
      ++tp[y];
    }
    // Rank of the true class: classes scoring strictly higher, then ties
    // broken by index.
    std::size_t rank = 0;
    for (std::size_t c = 0; c < nc; ++c) {
      if (p[c] > p[y] || (p[c] == p[y] && c < y)) ++rank;
    }
    if (rank < kk) ++topk;
    if (!classes[y].risk) {
      ++non_risk;
      if (classes[yhat].risk) ++alarms;
    }
  }
  const double n = static_cast<double>(count);
  report->accuracy = static_cast<double>(correct) / n;
  report->mean_recall_at_k = static_cast<double>(topk) / n;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < nc; ++c) {
    const double prec = predicted[c] ? static_cast<double>(tp[c]) /
                                           static_cast<double>(predicted[c])
                                     : 0.0;
    const double rec =
        actual[c] ? static_cast<double>(tp[c]) / static_cast<double>(actual[c])
                  : 0.0;
    report->precision[c] = prec;
    report->recall[c] = rec;
    f1_sum += prec + rec > 0 ? 2 * prec * rec / (prec + rec) : 0.0;
  }
  report->macro_f1 = f1_sum / static_cast<double>(nc);
  report->false_alarm_rate =
      non_risk ? std::optional<double>(static_cast<double>(alarms) /
                                       static_cast<double>(non_risk))
               : std::nullopt;

  std::vector<double> scores(count);
  std::vector<std::uint8_t> pos(count);
  double ap_sum = 0.0, auc_sum = 0.0;
  std::size_t ap_n = 0, auc_n = 0;
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t i = 0; i < count; ++i) {
      scores[i] = posteriors[i * nc + c];
      pos[i] = labels[i] == static_cast<int>(c);
    }
    if (auto ap = AveragePrecision(scores, pos)) {
      ap_sum += *ap;
      ++ap_n;
    }
    if (auto auc = BinaryAuc(scores, pos)) {
      auc_sum += *auc;
      ++auc_n;
    }
  }
  if (ap_n) report->mean_average_precision = ap_sum / static_cast<double>(ap_n);
  if (auc_n) report->auc = auc_sum / static_cast<double>(auc_n);
}

std::set<std::string> PatternSet(std::span<const Scenario> samples) {
  std::set<std::string> out;
  for (const auto& s : samples) out.insert(FactPattern(s.facts));
  return out;
}

QuickMetrics EvaluateQuick(const LogicModel& model,
                           std::span<const Scenario> samples) {
  QuickMetrics q;
  if (samples.empty()) return q;
  const Reasoner reasoner(model);
  const HeadParams heads = model.heads();
  std::size_t correct = 0, fact_correct = 0, fact_total = 0;
  for (const auto& s : samples) {
    const FactGraph g = BuildFactGraph(s.views, heads, model.config().fusion);
    const auto post = reasoner.Posterior(g.confidence);
    if (static_cast<int>(ArgMax(post)) == s.label) ++correct;
    for (std::size_t k = 0; k < g.confidence.size(); ++k) {
      fact_correct += (g.confidence[k] >= 0.5) == (s.facts[k] != 0);
      ++fact_total;
    }
  }
  q.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
  q.fact_accuracy =
      static_cast<double>(fact_correct) / static_cast<double>(fact_total);
  return q;
}

MetricsReport Evaluate(const LogicModel& model,
                       std::span<const Scenario> samples,
                       const EvalOptions& options) {
  const auto& classes = model.config().classes;
  const Reasoner reasoner(model);
  const HeadParams heads = model.heads();
  const FusionOptions& fusion = model.config().fusion;

  MetricsReport report;
  std::vector<int> labels;
  std::vector<double> posteriors;
  std::vector<std::vector<double>> risk_confidences;
  std::size_t fact_correct = 0, fact_total = 0;
  for (const auto& s : samples) {
    if (s.facts.size() != model.num_facts()) {
      throw ConfigError("sample fact count does not match the model");
    }
    const FactGraph g = BuildFactGraph(s.views, heads, fusion);
    const auto post = reasoner.Posterior(g.confidence);
    labels.push_back(s.label);
    posteriors.insert(posteriors.end(), post.begin(), post.end());
    for (std::size_t k = 0; k < g.confidence.size(); ++k) {
      fact_correct += (g.confidence[k] >= 0.5) == (s.facts[k] != 0);
      ++fact_total;
    }
    if (classes[ArgMax(post)].risk) risk_confidences.push_back(g.confidence);
  }
  ComputeClassification(labels, posteriors, classes, options.k, &report);
  if (fact_total) {
    report.fact_accuracy =
        static_cast<double>(fact_correct) / static_cast<double>(fact_total);
  }

  if (options.counterfactual && !risk_confidences.empty()) {
    std::size_t tried = 0, valid = 0;
    for (const auto& c : risk_confidences) {
      if (options.counterfactual_limit && tried >= options.counterfactual_limit) {
        break;
      }
      ++tried;
      try {
        const auto r = ExactSearch(reasoner, c, options.search);
        const auto check = reasoner.Posterior(
            ApplyInterventions(c, r.interventions));
        if (ArgMax(check) != r.original_label) ++valid;
      } catch (const NoCounterfactual&) {
      }
    }
    report.counterfactual_validity =
        static_cast<double>(valid) / static_cast<double>(tried);
  }

  if (!options.compositional.empty()) {
    std::size_t correct = 0, novel = 0, novel_correct = 0;
    for (const auto& s : options.compositional) {
      const FactGraph g = BuildFactGraph(s.views, heads, fusion);
      const auto post = reasoner.Posterior(g.confidence);
      const bool ok = static_cast<int>(ArgMax(post)) == s.label;
      correct += ok;
      if (options.train_patterns &&
          !options.train_patterns->contains(FactPattern(s.facts))) {
        ++novel;
        novel_correct += ok;
      }
    }
    const double n = static_cast<double>(options.compositional.size());
    report.compositional_accuracy = static_cast<double>(correct) / n;
    if (novel) {
      report.novel_pattern_rate =
          static_cast<double>(novel_correct) / static_cast<double>(novel);
    }
  }
  return report;
}

}  // namespace factrule
