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

#include "factrule/param_store.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "factrule/errors.h"

namespace factrule {

std::size_t ShapeSize(std::span<const std::size_t> shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

ParamGroup& ParamStore::Add(std::string name, std::vector<std::size_t> shape) {
  if (Has(name)) throw ConfigError("duplicate parameter group: " + name);
  const std::size_t n = ShapeSize(shape);
  groups_.push_back(ParamGroup{std::move(name), std::move(shape),
                               std::vector<double>(n, 0.0),
                               std::vector<double>(n, 0.0)});
  return groups_.back();
}

bool ParamStore::Has(std::string_view name) const {
  return std::any_of(groups_.begin(), groups_.end(),
                     [&](const ParamGroup& g) { return g.name == name; });
}

ParamGroup& ParamStore::Get(std::string_view name) {
  for (auto& g : groups_) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown parameter group: " + std::string(name));
}

const ParamGroup& ParamStore::Get(std::string_view name) const {
  for (const auto& g : groups_) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown parameter group: " + std::string(name));
}

void ParamStore::ZeroGrads() {
  for (auto& g : groups_) std::fill(g.grad.begin(), g.grad.end(), 0.0);
}

std::size_t ParamStore::TotalSize() const {
  std::size_t n = 0;
  for (const auto& g : groups_) n += g.size();
  return n;
}

namespace {

void CheckFinite(const std::string& name, const std::vector<double>& v,
                 const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericalError(name, what);
  }
}

}  // namespace

void ParamStore::CheckFiniteValues() const {
  for (const auto& g : groups_) CheckFinite(g.name, g.value, "non-finite parameter");
}

void ParamStore::CheckFiniteGrads() const {
  for (const auto& g : groups_) CheckFinite(g.name, g.grad, "non-finite gradient");
}

}  // namespace factrule
