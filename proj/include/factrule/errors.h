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

#ifndef FACTRULE_ERRORS_H_
#define FACTRULE_ERRORS_H_

#include <stdexcept>
#include <string>

namespace factrule {

// Inconsistent shapes, out-of-range labels, invalid hyperparameters.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A non-finite value was produced. `tensor()` names the offending quantity.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string tensor, const std::string& what)
      : std::runtime_error(what + " [" + tensor + "]"),
        tensor_(std::move(tensor)) {}

  const std::string& tensor() const { return tensor_; }

 private:
  std::string tensor_;
};

// Malformed or unsupported persisted document.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input names facts or dimensions that do not match the model.
class VocabularyMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// No intervention within the allowed cardinality flips the prediction.
class NoCounterfactual : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace factrule

#endif  // FACTRULE_ERRORS_H_
