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

#include "factrule/scenario.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "factrule/errors.h"

namespace factrule {

bool GroundTruthRule::Fires(std::span<const std::uint8_t> facts) const {
  for (auto k : positive) {
    if (!facts[k]) return false;
  }
  for (auto k : negated) {
    if (facts[k]) return false;
  }
  return true;
}

void GeneratorConfig::Validate() const {
  const std::size_t n = vocabulary.size();
  if (n == 0) throw ConfigError("generator needs at least one fact");
  if (classes.empty()) throw ConfigError("generator needs at least one class");
  if (default_class >= classes.size()) {
    throw ConfigError("default class out of range");
  }
  if (num_views == 0 || feature_dim == 0) {
    throw ConfigError("views and feature dimension must be positive");
  }
  if (prior.size() != n) throw ConfigError("prior must have one entry per fact");
  auto open_unit = [](double p) { return p > 0.0 && p < 1.0; };
  for (double p : prior) {
    if (!open_unit(p)) throw ConfigError("priors must lie in (0, 1)");
  }
  std::vector<int> has_parent(n, 0);
  for (const auto& d : dependencies) {
    if (d.child >= n || d.parent >= n || d.child == d.parent) {
      throw ConfigError("invalid fact dependency");
    }
    if (has_parent[d.child]++) {
      throw ConfigError("a fact may depend on at most one parent");
    }
    if (!open_unit(d.p_if_parent) || !open_unit(d.p_if_not_parent)) {
      throw ConfigError("conditional priors must lie in (0, 1)");
    }
  }
  // Parents must form a forest (no cycles).
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t cur = k;
    for (std::size_t steps = 0;; ++steps) {
      auto it = std::find_if(dependencies.begin(), dependencies.end(),
                             [&](const FactDependency& d) { return d.child == cur; });
      if (it == dependencies.end()) break;
      cur = it->parent;
      if (steps > n) throw ConfigError("cyclic fact dependencies");
    }
  }
  if (!occlusion_table.empty() && occlusion_table.size() != n * num_views) {
    throw ConfigError("occlusion table must be N x V");
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t v = 0; v < num_views; ++v) {
      const double o = OcclusionAt(k, v);
      if (!(o >= 0.0 && o < 1.0)) {
        throw ConfigError("occlusion probabilities must lie in [0, 1)");
      }
    }
  }
  if (observation_noise < 0) throw ConfigError("noise must be non-negative");
  if (!(label_noise >= 0 && label_noise < 1)) {
    throw ConfigError("label noise must lie in [0, 1)");
  }
  if (label_noise > 0 && classes.size() < 2) {
    throw ConfigError("label noise needs at least two classes");
  }
  for (const auto& r : rules) {
    if (r.target >= classes.size()) throw ConfigError("rule target out of range");
    for (auto k : r.positive) {
      if (k >= n) throw ConfigError("rule fact out of range");
    }
    for (auto k : r.negated) {
      if (k >= n) throw ConfigError("rule fact out of range");
    }
  }
}

double GeneratorConfig::OcclusionAt(std::size_t fact, std::size_t view) const {
  if (occlusion_table.empty()) return occlusion;
  return occlusion_table[fact * num_views + view];
}

GeneratorConfig Clinic8Config() {
  GeneratorConfig c;
  c.vocabulary = FactVocabulary({
      {"rail_down", "Bed rail down"},
      {"edge_sitting", "Sitting on bed edge"},
      {"caregiver_near", "Caregiver near"},
      {"legs_over_edge", "Legs over bed edge"},
      {"support_contact", "Hand on support"},
      {"on_bed", "On bed"},
      {"standing", "Standing"},
      {"lights_on", "Lights on"},
  });
  c.classes = {{"Resting", false},
               {"Assisted-Transfer", false},
               {"Unattended-Exit-Risk", true},
               {"Fall", true}};
  c.default_class = 0;
  enum { kRail, kEdge, kCare, kLegs, kSupport, kOnBed, kStanding, kLights };
  c.prior = {0.5, 0.3, 0.35, 0.2, 0.3, 0.7, 0.3, 0.6};
  c.dependencies = {
      {kStanding, kOnBed, 0.05, 0.6},
      {kEdge, kOnBed, 0.5, 0.05},
      {kLegs, kEdge, 0.8, 0.1},
      {kSupport, kStanding, 0.6, 0.25},
  };
  c.rules = {
      {{}, {kOnBed, kStanding}, 3, 4},
      {{kEdge, kRail}, {kCare}, 2, 3},
      {{kCare, kEdge}, {}, 1, 2},
      {{kCare, kStanding}, {}, 1, 1},
  };
  return c;
}

std::vector<double> FeatureEmbedding(const GeneratorConfig& config) {
  const std::size_t d = config.feature_dim;
  const std::size_t cols = 2 * config.vocabulary.size();
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::normal_distribution<double> normal;
  // Column-major generation, stored row-major D x 2N.
  std::vector<std::vector<double>> basis;
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<double> col(d);
    for (double& x : col) x = normal(rng);
    if (d >= cols) {
      for (const auto& b : basis) {
        double dot = 0.0;
        for (std::size_t i = 0; i < d; ++i) dot += b[i] * col[i];
        for (std::size_t i = 0; i < d; ++i) col[i] -= dot * b[i];
      }
      double norm = 0.0;
      for (double x : col) norm += x * x;
      norm = std::sqrt(norm);
      for (double& x : col) x /= norm;
    } else {
      for (double& x : col) x /= std::sqrt(static_cast<double>(cols));
    }
    basis.push_back(std::move(col));
  }
  std::vector<double> w(d * cols);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < cols; ++j) w[i * cols + j] = basis[j][i];
  }
  return w;
}

namespace {

// Facts ordered so each parent precedes its children.
std::vector<std::size_t> SamplingOrder(const GeneratorConfig& config) {
  const std::size_t n = config.vocabulary.size();
  std::vector<std::size_t> order;
  std::vector<int> placed(n, 0);
  while (order.size() < n) {
    for (std::size_t k = 0; k < n; ++k) {
      if (placed[k]) continue;
      auto it = std::find_if(config.dependencies.begin(),
                             config.dependencies.end(),
                             [&](const FactDependency& d) { return d.child == k; });
      if (it == config.dependencies.end() || placed[it->parent]) {
        order.push_back(k);
        placed[k] = 1;
      }
    }
  }
  return order;
}

double FactProbability(const GeneratorConfig& config, std::size_t k,
                       std::span<const std::uint8_t> facts) {
  for (const auto& d : config.dependencies) {
    if (d.child == k) return facts[d.parent] ? d.p_if_parent : d.p_if_not_parent;
  }
  return config.prior[k];
}

}  // namespace

std::mt19937_64 SampleStream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

Scenario SampleScenario(const GeneratorConfig& config,
                        std::span<const double> embedding,
                        std::mt19937_64& rng) {
  const std::size_t n = config.vocabulary.size();
  const std::size_t nv = config.num_views;
  const std::size_t d = config.feature_dim;
  const std::size_t cols = 2 * n;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal;

  Scenario s;
  s.facts.assign(n, 0);
  for (std::size_t k : SamplingOrder(config)) {
    s.facts[k] = unif(rng) < FactProbability(config, k, s.facts) ? 1 : 0;
  }
  std::size_t label = BayesOracle(config, s.facts);
  if (config.label_noise > 0 && unif(rng) < config.label_noise) {
    const std::size_t c = config.classes.size();
    std::uniform_int_distribution<std::size_t> other(0, c - 2);
    const std::size_t pick = other(rng);
    label = pick >= label ? pick + 1 : pick;
  }
  s.label = static_cast<int>(label);

  // visible[v][k]
  std::vector<std::vector<std::uint8_t>> visible(nv,
                                                 std::vector<std::uint8_t>(n));
  for (std::size_t k = 0; k < n; ++k) {
    for (;;) {
      bool any = false;
      for (std::size_t v = 0; v < nv; ++v) {
        visible[v][k] = unif(rng) >= config.OcclusionAt(k, v) ? 1 : 0;
        any = any || visible[v][k];
      }
      if (any || config.allow_total_occlusion) break;
    }
  }
  s.views.resize(nv);
  std::vector<double> code(cols);
  for (std::size_t v = 0; v < nv; ++v) {
    for (std::size_t k = 0; k < n; ++k) {
      code[k] = static_cast<double>(s.facts[k] & visible[v][k]);
      code[n + k] = static_cast<double>(visible[v][k]);
    }
    auto& x = s.views[v].features;
    x.assign(d, 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < cols; ++j) acc += embedding[i * cols + j] * code[j];
      x[i] = acc;
    }
    if (config.observation_noise > 0) {
      for (double& xi : x) xi += config.observation_noise * normal(rng);
    }
    s.views[v].visible = visible[v];
  }
  return s;
}

std::size_t BayesOracle(const GeneratorConfig& config,
                        std::span<const std::uint8_t> facts) {
  const GroundTruthRule* best = nullptr;
  for (const auto& r : config.rules) {
    if (r.Fires(facts) && (best == nullptr || r.priority > best->priority)) {
      best = &r;
    }
  }
  return best ? best->target : config.default_class;
}

double AssignmentProbability(const GeneratorConfig& config,
                             std::span<const std::uint8_t> facts) {
  double p = 1.0;
  for (std::size_t k = 0; k < facts.size(); ++k) {
    const double q = FactProbability(config, k, facts);
    p *= facts[k] ? q : 1.0 - q;
  }
  return p;
}

std::vector<double> ClassDistribution(const GeneratorConfig& config) {
  const std::size_t n = config.vocabulary.size();
  const std::size_t c = config.classes.size();
  if (n > 24) throw ConfigError("enumeration limited to 24 facts");
  std::vector<double> clean(c, 0.0);
  std::vector<std::uint8_t> bits(n);
  for (std::uint64_t code = 0; code < (1ULL << n); ++code) {
    for (std::size_t k = 0; k < n; ++k) bits[k] = (code >> k) & 1U;
    clean[BayesOracle(config, bits)] += AssignmentProbability(config, bits);
  }
  if (config.label_noise == 0 || c < 2) return clean;
  std::vector<double> noisy(c);
  const double r = config.label_noise;
  for (std::size_t y = 0; y < c; ++y) {
    noisy[y] = (1 - r) * clean[y] + r * (1 - clean[y]) / static_cast<double>(c - 1);
  }
  return noisy;
}

std::string FactPattern(std::span<const std::uint8_t> facts) {
  std::string s(facts.size(), '0');
  for (std::size_t k = 0; k < facts.size(); ++k) s[k] = facts[k] ? '1' : '0';
  return s;
}

Dataset GenerateDataset(const GeneratorConfig& config, std::size_t count,
                        std::uint64_t first_id) {
  config.Validate();
  if (count == 0) throw ConfigError("count must be at least 1");
  const std::vector<double> embedding = FeatureEmbedding(config);
  Dataset ds{config, {}};
  ds.samples.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t id = first_id + i;
    std::mt19937_64 rng = SampleStream(config.seed, id);
    Scenario s = SampleScenario(config, embedding, rng);
    s.id = id;
    ds.samples.push_back(std::move(s));
  }
  return ds;
}

DatasetManifest BuildManifest(const GeneratorConfig& config,
                              std::span<const Scenario> samples) {
  DatasetManifest m;
  m.config_hash = ConfigHash(config);
  m.count = samples.size();
  m.class_histogram.assign(config.classes.size(), 0);
  for (const auto& s : samples) {
    ++m.class_histogram.at(static_cast<std::size_t>(s.label));
    ++m.census[FactPattern(s.facts)];
  }
  return m;
}

std::string CanonicalConfigText(const GeneratorConfig& config) {
  std::ostringstream os;
  os.precision(17);
  os << "facts:";
  for (const auto& f : config.vocabulary.facts()) os << f.id << '|' << f.label << ';';
  os << "\nclasses:";
  for (const auto& c : config.classes) os << c.name << '|' << c.risk << ';';
  os << "\ndefault:" << config.default_class << "\nviews:" << config.num_views
     << "\ndim:" << config.feature_dim << "\nprior:";
  for (double p : config.prior) os << p << ';';
  os << "\ndeps:";
  for (const auto& d : config.dependencies) {
    os << d.child << '<' << d.parent << ':' << d.p_if_parent << ','
       << d.p_if_not_parent << ';';
  }
  os << "\nocclusion:" << config.occlusion << "\ntable:";
  for (double o : config.occlusion_table) os << o << ';';
  os << "\ntotal:" << config.allow_total_occlusion
     << "\nnoise:" << config.observation_noise
     << "\nlabel_noise:" << config.label_noise << "\nseed:" << config.seed
     << "\nrules:";
  for (const auto& r : config.rules) {
    for (auto k : r.positive) os << '+' << k;
    for (auto k : r.negated) os << '-' << k;
    os << "=>" << r.target << '@' << r.priority << ';';
  }
  return os.str();
}

std::string ConfigHash(const GeneratorConfig& config) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : CanonicalConfigText(config)) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace factrule
