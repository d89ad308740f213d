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

#ifndef FACTRULE_FACT_FUSION_H_
#define FACTRULE_FACT_FUSION_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factrule {

struct FactDescriptor {
  std::string id;
  std::string label;
};

// Ordered predicate vocabulary. Index = position; ids are unique.
class FactVocabulary {
 public:
  FactVocabulary() = default;
  explicit FactVocabulary(std::vector<FactDescriptor> facts);

  std::size_t size() const { return facts_.size(); }
  const FactDescriptor& operator[](std::size_t i) const { return facts_[i]; }
  const std::vector<FactDescriptor>& facts() const { return facts_; }
  std::optional<std::size_t> IndexOf(std::string_view id) const;

  friend bool operator==(const FactVocabulary& a, const FactVocabulary& b) {
    if (a.facts_.size() != b.facts_.size()) return false;
    for (std::size_t i = 0; i < a.facts_.size(); ++i) {
      if (a.facts_[i].id != b.facts_[i].id ||
          a.facts_[i].label != b.facts_[i].label) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<FactDescriptor> facts_;
};

// Per-view feature vector. `visible` comes from the generator and is never
// read by the model; evaluation code uses it.
struct ViewObservation {
  std::vector<double> features;
  std::vector<std::uint8_t> visible;
};

// Read-only view of the two heads shared across views: an affine logit head
// (N x D weight, N bias) and a linear reliability head (N x D weight). A
// reliability bias would be shared by every view of a fact and cancel in the
// view softmax, so it is not a parameter.
struct HeadParams {
  std::size_t num_facts = 0;
  std::size_t feature_dim = 0;
  std::span<const double> pred_weight;
  std::span<const double> pred_bias;
  std::span<const double> rel_weight;
};

struct HeadGrads {
  std::span<double> pred_weight;
  std::span<double> pred_bias;
  std::span<double> rel_weight;
};

struct FusionOptions {
  double eps = 1e-8;
  // Ablation: ignore reliabilities and pool views with equal weight.
  bool uniform_attribution = false;
};

struct ViewPrediction {
  std::vector<double> logits;
  std::vector<double> reliabilities;
};

// Fused confidences plus every intermediate, all N x V row-major.
struct FactGraph {
  std::size_t num_facts = 0;
  std::size_t num_views = 0;
  std::vector<double> confidence;
  std::vector<double> attribution;
  std::vector<double> logits;
  std::vector<double> reliabilities;

  double attribution_at(std::size_t fact, std::size_t view) const {
    return attribution[fact * num_views + view];
  }
};

double Sigmoid(double x);

ViewPrediction PredictView(std::span<const double> features,
                           const HeadParams& heads);

// exp(r_v - max r) / (sum_u exp(r_u - max r) + eps).
std::vector<double> ViewAttribution(std::span<const double> reliabilities,
                                    double eps);

// sigma(sum_v w_v z_v).
double Fuse(std::span<const double> logits, std::span<const double> weights);

FactGraph BuildFactGraph(std::span<const ViewObservation> views,
                         const HeadParams& heads,
                         const FusionOptions& options = {});

// Fact graph that carries externally supplied confidences and no view data.
FactGraph FactGraphFromConfidences(std::span<const double> confidence);

// Accumulates d(loss)/d(head params) given d(loss)/d(confidence).
void BackpropFactGraph(const FactGraph& graph,
                       std::span<const ViewObservation> views,
                       std::span<const double> d_confidence,
                       const FusionOptions& options, HeadGrads grads);

}  // namespace factrule

#endif  // FACTRULE_FACT_FUSION_H_
