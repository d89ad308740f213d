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

#ifndef FACTRULE_PARAM_STORE_H_
#define FACTRULE_PARAM_STORE_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace factrule {

// One named, flat, row-major parameter array and its gradient accumulator.
struct ParamGroup {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> value;
  std::vector<double> grad;

  std::size_t size() const { return value.size(); }
};

std::size_t ShapeSize(std::span<const std::size_t> shape);

// Ordered collection of parameter groups. Group order is insertion order and
// is part of the checkpoint layout.
class ParamStore {
 public:
  ParamGroup& Add(std::string name, std::vector<std::size_t> shape);

  bool Has(std::string_view name) const;
  ParamGroup& Get(std::string_view name);
  const ParamGroup& Get(std::string_view name) const;

  std::vector<ParamGroup>& groups() { return groups_; }
  const std::vector<ParamGroup>& groups() const { return groups_; }

  void ZeroGrads();
  std::size_t TotalSize() const;

  // Throws NumericalError naming the first group holding a non-finite value.
  void CheckFiniteValues() const;
  void CheckFiniteGrads() const;

 private:
  std::vector<ParamGroup> groups_;
};

}  // namespace factrule

#endif  // FACTRULE_PARAM_STORE_H_
