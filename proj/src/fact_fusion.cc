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

#include "factrule/fact_fusion.h"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "factrule/errors.h"

namespace factrule {

FactVocabulary::FactVocabulary(std::vector<FactDescriptor> facts)
    : facts_(std::move(facts)) {
  if (facts_.empty()) throw ConfigError("fact vocabulary must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& f : facts_) {
    if (f.id.empty()) throw ConfigError("fact id must not be empty");
    if (!seen.insert(f.id).second) {
      throw ConfigError("duplicate fact id: " + f.id);
    }
  }
}

std::optional<std::size_t> FactVocabulary::IndexOf(std::string_view id) const {
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    if (facts_[i].id == id) return i;
  }
  return std::nullopt;
}

double Sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

ViewPrediction PredictView(std::span<const double> features,
                           const HeadParams& heads) {
  const std::size_t n = heads.num_facts;
  const std::size_t d = heads.feature_dim;
  if (features.size() != d) {
    throw ConfigError("feature dimension " + std::to_string(features.size()) +
                      " does not match head dimension " + std::to_string(d));
  }
  ViewPrediction out{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    double z = heads.pred_bias[k];
    double r = 0.0;
    const double* wp = heads.pred_weight.data() + k * d;
    const double* wr = heads.rel_weight.data() + k * d;
    for (std::size_t i = 0; i < d; ++i) {
      z += wp[i] * features[i];
      r += wr[i] * features[i];
    }
    out.logits[k] = z;
    out.reliabilities[k] = r;
  }
  return out;
}

std::vector<double> ViewAttribution(std::span<const double> reliabilities,
                                    double eps) {
  if (reliabilities.empty()) throw ConfigError("at least one view required");
  const double top =
      *std::max_element(reliabilities.begin(), reliabilities.end());
  std::vector<double> w(reliabilities.size());
  double sum = 0.0;
  for (std::size_t v = 0; v < w.size(); ++v) {
    w[v] = std::exp(reliabilities[v] - top);
    sum += w[v];
  }
  const double denom = sum + eps;
  for (double& x : w) x /= denom;
  return w;
}

double Fuse(std::span<const double> logits, std::span<const double> weights) {
  double s = 0.0;
  for (std::size_t v = 0; v < logits.size(); ++v) s += weights[v] * logits[v];
  return Sigmoid(s);
}

FactGraph BuildFactGraph(std::span<const ViewObservation> views,
                         const HeadParams& heads,
                         const FusionOptions& options) {
  if (views.empty()) throw ConfigError("at least one view required");
  const std::size_t n = heads.num_facts;
  const std::size_t nv = views.size();
  FactGraph g;
  g.num_facts = n;
  g.num_views = nv;
  g.confidence.resize(n);
  g.attribution.resize(n * nv);
  g.logits.resize(n * nv);
  g.reliabilities.resize(n * nv);
  for (std::size_t v = 0; v < nv; ++v) {
    ViewPrediction p = PredictView(views[v].features, heads);
    for (std::size_t k = 0; k < n; ++k) {
      g.logits[k * nv + v] = p.logits[k];
      g.reliabilities[k * nv + v] = p.reliabilities[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    std::span<const double> z(g.logits.data() + k * nv, nv);
    std::span<const double> rho(g.reliabilities.data() + k * nv, nv);
    std::vector<double> w;
    if (options.uniform_attribution) {
      w.assign(nv, 1.0 / static_cast<double>(nv));
    } else {
      w = ViewAttribution(rho, options.eps);
    }
    std::copy(w.begin(), w.end(), g.attribution.begin() + k * nv);
    g.confidence[k] = Fuse(z, w);
  }
  return g;
}

FactGraph FactGraphFromConfidences(std::span<const double> confidence) {
  FactGraph g;
  g.num_facts = confidence.size();
  g.num_views = 0;
  g.confidence.assign(confidence.begin(), confidence.end());
  return g;
}

void BackpropFactGraph(const FactGraph& graph,
                       std::span<const ViewObservation> views,
                       std::span<const double> d_confidence,
                       const FusionOptions& options, HeadGrads grads) {
  const std::size_t n = graph.num_facts;
  const std::size_t nv = graph.num_views;
  if (views.size() != nv) throw ConfigError("view count mismatch in backprop");
  const std::size_t d = views.front().features.size();
  std::vector<double> gz(nv), grho(nv);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = graph.confidence[k];
    const double gs = d_confidence[k] * c * (1.0 - c);
    if (gs == 0.0) continue;
    const double* a = graph.attribution.data() + k * nv;
    const double* z = graph.logits.data() + k * nv;
    for (std::size_t v = 0; v < nv; ++v) gz[v] = gs * a[v];
    if (options.uniform_attribution) {
      std::fill(grho.begin(), grho.end(), 0.0);
    } else {
      // Softmax Jacobian with the eps term: the max-shift makes the
      // denominator depend on the arg-max reliability through eps / denom,
      // which equals 1 - sum(a).
      double weighted = 0.0;
      double mass = 0.0;
      std::size_t top = 0;
      const double* rho = graph.reliabilities.data() + k * nv;
      for (std::size_t v = 0; v < nv; ++v) {
        const double ga = gs * z[v];
        weighted += a[v] * ga;
        mass += a[v];
        if (rho[v] > rho[top]) top = v;
      }
      for (std::size_t u = 0; u < nv; ++u) {
        grho[u] = a[u] * (gs * z[u]) - a[u] * weighted;
      }
      grho[top] -= (1.0 - mass) * weighted;
    }
    for (std::size_t v = 0; v < nv; ++v) {
      const auto& x = views[v].features;
      double* wp = grads.pred_weight.data() + k * d;
      double* wr = grads.rel_weight.data() + k * d;
      for (std::size_t i = 0; i < d; ++i) {
        wp[i] += gz[v] * x[i];
        wr[i] += grho[v] * x[i];
      }
      grads.pred_bias[k] += gz[v];
    }
  }
}

}  // namespace factrule
