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

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "factrule/errors.h"
#include "factrule/fact_fusion.h"
#include "factrule/model.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace factrule {
namespace {

std::vector<ViewObservation> RandomViews(std::size_t nv, std::size_t d,
                                         std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<ViewObservation> views(nv);
  for (auto& v : views) {
    v.features.resize(d);
    for (double& x : v.features) x = normal(rng);
    v.visible.assign(n, 1);
  }
  return views;
}

LogicModel RandomModel(std::size_t n, std::size_t d, std::uint64_t seed) {
  LogicModel model(testing::SmallConfig(n, 2, 2, 3, d));
  model.Initialize(seed, {.head_scale = 1.0});
  return model;
}

TEST(ViewAttributionTest, ReferenceExamples) {
  const std::vector<double> rho = {std::log(3.0), 0.0};
  const auto a = ViewAttribution(rho, 0.0);
  EXPECT_NEAR(a[0], 0.75, 1e-12);
  EXPECT_NEAR(a[1], 0.25, 1e-12);

  const std::vector<double> equal = {0.3, 0.3, 0.3};
  for (double w : ViewAttribution(equal, 0.0)) EXPECT_NEAR(w, 1.0 / 3, 1e-15);
  const std::vector<double> single = {-7.0};
  EXPECT_EQ(ViewAttribution(single, 0.0)[0], 1.0);
}

TEST(ViewAttributionTest, EpsilonOnlyShrinksTheRowSum) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> rho(1 + trial % 4);
    for (double& r : rho) r = normal(rng);
    double exact = 0.0, guarded = 0.0;
    for (double w : ViewAttribution(rho, 0.0)) exact += w;
    for (double w : ViewAttribution(rho, 1e-8)) guarded += w;
    EXPECT_NEAR(exact, 1.0, 1e-9);
    EXPECT_GT(guarded, 1.0 - 1e-8);
    EXPECT_LE(guarded, 1.0 + 1e-15);
  }
}

TEST(ViewAttributionTest, RaisingOneReliabilityShiftsWeightToward) {
  const std::vector<double> rho = {0.2, -0.4, 1.0};
  const auto base = ViewAttribution(rho, 1e-8);
  auto raised = rho;
  raised[1] += 0.5;
  const auto after = ViewAttribution(raised, 1e-8);
  EXPECT_GT(after[1], base[1]);
  EXPECT_LT(after[0], base[0]);
  EXPECT_LT(after[2], base[2]);
}

TEST(FuseTest, ReferenceExamples) {
  const std::vector<double> z1 = {4.0}, w1 = {1.0};
  EXPECT_NEAR(Fuse(z1, w1), 0.982014, 1e-6);
  const std::vector<double> z2 = {1.5, -100.0}, w2 = {1.0, 0.0};
  EXPECT_NEAR(Fuse(z2, w2), 0.817574, 1e-6);
}

TEST(ViewAttributionTest, ShiftInvariantAndStableForLargeInputs) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> rho(1 + trial % 4);
    for (double& r : rho) r = normal(rng);
    const auto base = ViewAttribution(rho, 1e-8);
    std::vector<double> shifted = rho;
    for (double& r : shifted) r += 500.0;
    const auto moved = ViewAttribution(shifted, 1e-8);
    for (std::size_t v = 0; v < rho.size(); ++v) {
      EXPECT_NEAR(base[v], moved[v], 1e-12);
    }
  }
  const std::vector<double> huge = {1e4, -1e4};
  const auto a = ViewAttribution(huge, 1e-8);
  EXPECT_TRUE(std::isfinite(a[0]) && std::isfinite(a[1]));
  EXPECT_NEAR(a[0] + a[1], 1.0, 1e-8);
}

TEST(BuildFactGraphTest, RowsSumToOneAndConfidenceMatchesDefinition) {
  std::mt19937_64 rng(3);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const std::size_t n = 1 + seed % 8, nv = 1 + seed % 3, d = 2 + seed % 5;
    LogicModel model = RandomModel(n, d, seed);
    const auto views = RandomViews(nv, d, n, rng);
    const FactGraph g = BuildFactGraph(views, model.heads(), {.eps = 0.0});
    for (std::size_t k = 0; k < n; ++k) {
      double sum = 0.0, pooled = 0.0;
      for (std::size_t v = 0; v < nv; ++v) {
        sum += g.attribution_at(k, v);
        pooled += g.attribution_at(k, v) * g.logits[k * nv + v];
        EXPECT_GE(g.attribution_at(k, v), 0.0);
      }
      EXPECT_NEAR(sum, 1.0, 1e-9);
      EXPECT_NEAR(g.confidence[k], 1.0 / (1.0 + std::exp(-pooled)), 1e-12);
    }
  }
}

TEST(BuildFactGraphTest, ConfidenceWithinSigmoidOfLogitRange) {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    LogicModel model = RandomModel(6, 4, seed);
    const auto views = RandomViews(3, 4, 6, rng);
    const FactGraph g = BuildFactGraph(views, model.heads());
    for (std::size_t k = 0; k < 6; ++k) {
      const auto first = g.logits.begin() + k * 3;
      const auto [lo, hi] = std::minmax_element(first, first + 3);
      EXPECT_GE(g.confidence[k], Sigmoid(*lo) - 1e-12);
      EXPECT_LE(g.confidence[k], Sigmoid(*hi) + 1e-12);
    }
  }
}

TEST(BuildFactGraphTest, ViewPermutationEquivariance) {
  std::mt19937_64 rng(11);
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    LogicModel model = RandomModel(5, 3, seed);
    auto views = RandomViews(3, 3, 5, rng);
    const FactGraph g = BuildFactGraph(views, model.heads());
    std::vector<std::size_t> perm = {0, 1, 2};
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<ViewObservation> permuted;
    for (auto p : perm) permuted.push_back(views[p]);
    const FactGraph h = BuildFactGraph(permuted, model.heads());
    for (std::size_t k = 0; k < 5; ++k) {
      EXPECT_NEAR(g.confidence[k], h.confidence[k], 1e-12);
      for (std::size_t v = 0; v < 3; ++v) {
        EXPECT_NEAR(h.attribution_at(k, v), g.attribution_at(k, perm[v]),
                    1e-12);
      }
    }
  }
}

TEST(BuildFactGraphTest, DuplicatingEveryViewLeavesConfidenceUnchanged) {
  std::mt19937_64 rng(13);
  LogicModel model = RandomModel(4, 3, 2);
  const auto views = RandomViews(2, 3, 4, rng);
  std::vector<ViewObservation> doubled = views;
  doubled.insert(doubled.end(), views.begin(), views.end());
  // Exact with eps = 0; the default eps perturbs by at most ~eps * |z|.
  const FactGraph g = BuildFactGraph(views, model.heads(), {.eps = 0.0});
  const FactGraph h = BuildFactGraph(doubled, model.heads(), {.eps = 0.0});
  const FactGraph gd = BuildFactGraph(views, model.heads());
  const FactGraph hd = BuildFactGraph(doubled, model.heads());
  for (std::size_t k = 0; k < 4; ++k) {
    EXPECT_NEAR(g.confidence[k], h.confidence[k], 1e-12);
    EXPECT_NEAR(gd.confidence[k], hd.confidence[k], 1e-7);
  }
}

TEST(BuildFactGraphTest, UniformAttributionIsMeanPooling) {
  std::mt19937_64 rng(17);
  LogicModel model = RandomModel(4, 3, 9);
  const auto views = RandomViews(3, 3, 4, rng);
  FusionOptions opts;
  opts.uniform_attribution = true;
  const FactGraph g = BuildFactGraph(views, model.heads(), opts);
  for (std::size_t k = 0; k < 4; ++k) {
    double mean = 0.0;
    for (std::size_t v = 0; v < 3; ++v) mean += g.logits[k * 3 + v] / 3.0;
    EXPECT_NEAR(g.confidence[k], Sigmoid(mean), 1e-12);
  }
}

TEST(BuildFactGraphTest, RejectsEmptyViews) {
  LogicModel model = RandomModel(2, 2, 1);
  std::vector<ViewObservation> none;
  EXPECT_THROW(BuildFactGraph(none, model.heads()), ConfigError);
}

}  // namespace
}  // namespace factrule
