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

#include "factrule/logic_layer.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "factrule/errors.h"
#include "factrule/fact_fusion.h"

namespace factrule {

std::vector<double> Softmax(std::span<const double> scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(scores[i] - top);
    sum += p[i];
  }
  for (double& x : p) x /= sum;
  return p;
}

namespace {

double StandardGumbel(std::mt19937_64& rng) {
  // Open interval (0, 1) so both logs stay finite.
  std::uniform_real_distribution<double> unif(
      std::numeric_limits<double>::min(), 1.0);
  double u = unif(rng);
  while (u >= 1.0) u = unif(rng);
  return -std::log(-std::log(u));
}

std::size_t ArgMax(std::span<const double> v) {
  return static_cast<std::size_t>(
      std::max_element(v.begin(), v.end()) - v.begin());
}

void CheckDims(const LogicParams& p) {
  const auto& d = p.dims;
  if (d.num_rules == 0 || d.num_slots == 0 || d.num_facts == 0 ||
      d.num_classes == 0) {
    throw ConfigError("logic dimensions must be positive");
  }
  if (p.selection.size() != d.num_rules * d.num_slots * d.num_facts ||
      p.negation.size() != d.num_rules * d.num_slots ||
      p.rule_weight.size() != d.num_classes * d.num_rules ||
      p.class_bias.size() != d.num_classes) {
    throw ConfigError("logic parameter shapes do not match dimensions");
  }
}

}  // namespace

Selection SelectLiteral(std::span<const double> selection_logits,
                        const SelectionOptions& options,
                        std::mt19937_64* rng) {
  if (!(options.temperature > 0)) {
    throw ConfigError("selection temperature must be positive");
  }
  std::vector<double> scaled(selection_logits.begin(), selection_logits.end());
  for (double& x : scaled) {
    if (options.mode == SelectionMode::kSampled) {
      if (rng == nullptr) throw ConfigError("sampled selection needs an rng");
      x += StandardGumbel(*rng);
    }
    x /= options.temperature;
  }
  Selection s;
  s.soft = Softmax(scaled);
  if (options.hard_forward) {
    s.forward.assign(s.soft.size(), 0.0);
    s.forward[ArgMax(scaled)] = 1.0;
  } else {
    s.forward = s.soft;
  }
  return s;
}

namespace {

// (1 - eta) * atom + eta * (1 - atom), arranged so eta = 0.5 yields exactly
// 0.5 and rounding cannot leave [0, 1].
double MixTruth(double atom, double eta) {
  return std::clamp(eta + (1.0 - 2.0 * eta) * atom, 0.0, 1.0);
}

}  // namespace

double LiteralTruth(std::span<const double> gamma, double eta,
                    std::span<const double> confidence) {
  double atom = 0.0;
  for (std::size_t i = 0; i < gamma.size(); ++i) atom += gamma[i] * confidence[i];
  return MixTruth(atom, eta);
}

double RuleStrength(std::span<const double> truths) {
  double t = 1.0;
  for (double mu : truths) t *= mu;
  return t;
}

std::vector<double> ClassPosterior(std::span<const double> strengths,
                                   std::span<const double> rule_weight,
                                   std::span<const double> class_bias) {
  const std::size_t c = class_bias.size();
  const std::size_t m = strengths.size();
  if (rule_weight.size() != c * m) {
    throw ConfigError("rule weight shape does not match C x M");
  }
  std::vector<double> scores(class_bias.begin(), class_bias.end());
  for (std::size_t y = 0; y < c; ++y) {
    for (std::size_t r = 0; r < m; ++r) {
      scores[y] += rule_weight[y * m + r] * strengths[r];
    }
  }
  return Softmax(scores);
}

RuleStructure SampleStructure(const LogicParams& params,
                              const SelectionOptions& options,
                              std::mt19937_64* rng) {
  CheckDims(params);
  const auto& d = params.dims;
  RuleStructure s;
  s.dims = d;
  s.options = options;
  s.soft.resize(d.num_rules * d.num_slots * d.num_facts);
  s.forward.resize(s.soft.size());
  s.gate.resize(d.num_rules * d.num_slots);
  for (std::size_t slot = 0; slot < d.num_rules * d.num_slots; ++slot) {
    const std::size_t off = slot * d.num_facts;
    Selection sel = SelectLiteral(
        params.selection.subspan(off, d.num_facts), options, rng);
    std::copy(sel.soft.begin(), sel.soft.end(), s.soft.begin() + off);
    std::copy(sel.forward.begin(), sel.forward.end(), s.forward.begin() + off);
    s.gate[slot] = Sigmoid(params.negation[slot]);
  }
  return s;
}

RuleActivation EvaluateRules(std::span<const double> confidence,
                             const RuleStructure& structure,
                             const LogicParams& params) {
  const auto& d = structure.dims;
  if (confidence.size() != d.num_facts) {
    throw ConfigError("fact count " + std::to_string(confidence.size()) +
                      " does not match model fact count " +
                      std::to_string(d.num_facts));
  }
  RuleActivation a;
  a.atom.resize(d.num_rules * d.num_slots);
  a.truth.resize(a.atom.size());
  a.strength.resize(d.num_rules);
  for (std::size_t m = 0; m < d.num_rules; ++m) {
    for (std::size_t j = 0; j < d.num_slots; ++j) {
      const std::size_t slot = m * d.num_slots + j;
      auto gamma = structure.forward_at(m, j);
      double atom = 0.0;
      for (std::size_t i = 0; i < d.num_facts; ++i) {
        atom += gamma[i] * confidence[i];
      }
      const double eta = structure.gate[slot];
      a.atom[slot] = atom;
      a.truth[slot] = MixTruth(atom, eta);
    }
    a.strength[m] = RuleStrength(
        std::span<const double>(a.truth).subspan(m * d.num_slots, d.num_slots));
  }
  a.scores.assign(params.class_bias.begin(), params.class_bias.end());
  for (std::size_t y = 0; y < d.num_classes; ++y) {
    for (std::size_t m = 0; m < d.num_rules; ++m) {
      a.scores[y] += params.rule_weight[y * d.num_rules + m] * a.strength[m];
    }
  }
  a.posterior = Softmax(a.scores);
  return a;
}

ReasonResult Reason(std::span<const double> confidence,
                    const LogicParams& params, const SelectionOptions& options,
                    std::mt19937_64* rng) {
  ReasonResult r;
  r.structure = SampleStructure(params, options, rng);
  r.activation = EvaluateRules(confidence, r.structure, params);
  return r;
}

void BackpropRules(std::span<const double> confidence,
                   const RuleStructure& structure,
                   const RuleActivation& activation,
                   const LogicParams& params,
                   std::span<const double> d_scores, LogicGrads grads,
                   std::span<double> d_forward, std::span<double> d_gate,
                   std::span<double> d_confidence) {
  const auto& d = structure.dims;
  const std::size_t nm = d.num_rules;
  const std::size_t nl = d.num_slots;
  std::vector<double> prefix(nl + 1), suffix(nl + 1);
  for (std::size_t y = 0; y < d.num_classes; ++y) {
    grads.class_bias[y] += d_scores[y];
    for (std::size_t m = 0; m < nm; ++m) {
      grads.rule_weight[y * nm + m] += d_scores[y] * activation.strength[m];
    }
  }
  for (std::size_t m = 0; m < nm; ++m) {
    double g_strength = 0.0;
    for (std::size_t y = 0; y < d.num_classes; ++y) {
      g_strength += d_scores[y] * params.rule_weight[y * nm + m];
    }
    if (g_strength == 0.0) continue;
    // Product of the other slots' truths, robust to zeros.
    const double* mu = activation.truth.data() + m * nl;
    prefix[0] = 1.0;
    for (std::size_t j = 0; j < nl; ++j) prefix[j + 1] = prefix[j] * mu[j];
    suffix[nl] = 1.0;
    for (std::size_t j = nl; j-- > 0;) suffix[j] = suffix[j + 1] * mu[j];
    for (std::size_t j = 0; j < nl; ++j) {
      const std::size_t slot = m * nl + j;
      const double g_mu = g_strength * prefix[j] * suffix[j + 1];
      const double eta = structure.gate[slot];
      const double atom = activation.atom[slot];
      const double g_atom = g_mu * (1.0 - 2.0 * eta);
      d_gate[slot] += g_mu * (1.0 - 2.0 * atom);
      auto gamma = structure.forward_at(m, j);
      double* dg = d_forward.data() + slot * d.num_facts;
      for (std::size_t i = 0; i < d.num_facts; ++i) {
        dg[i] += g_atom * confidence[i];
        d_confidence[i] += g_atom * gamma[i];
      }
    }
  }
}

void BackpropStructure(const RuleStructure& structure,
                       std::span<const double> d_forward,
                       std::span<const double> d_gate, LogicGrads grads) {
  const auto& d = structure.dims;
  const double inv_t = 1.0 / structure.options.temperature;
  for (std::size_t slot = 0; slot < d.num_rules * d.num_slots; ++slot) {
    const std::size_t off = slot * d.num_facts;
    const double* soft = structure.soft.data() + off;
    const double* g = d_forward.data() + off;
    double dot = 0.0;
    for (std::size_t i = 0; i < d.num_facts; ++i) dot += soft[i] * g[i];
    for (std::size_t i = 0; i < d.num_facts; ++i) {
      grads.selection[off + i] += inv_t * soft[i] * (g[i] - dot);
    }
    const double eta = structure.gate[slot];
    grads.negation[slot] += d_gate[slot] * eta * (1.0 - eta);
  }
}

double SelectionEntropy(const RuleStructure& structure, double scale,
                        std::span<double> d_soft) {
  double h = 0.0;
  for (std::size_t i = 0; i < structure.soft.size(); ++i) {
    const double p = structure.soft[i];
    if (p <= 0.0) continue;
    const double lp = std::log(p);
    h -= p * lp;
    if (!d_soft.empty()) d_soft[i] += -scale * (lp + 1.0);
  }
  return h;
}

}  // namespace factrule
