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

#include "factrule/split.h"

#include <array>
#include <sstream>
#include <stdexcept>

#include "factrule/errors.h"

namespace factrule {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitOn(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, sep)) out.push_back(Trim(item));
  return out;
}

}  // namespace

bool HoldoutPattern::Matches(std::span<const std::uint8_t> facts) const {
  for (const auto& [k, v] : assignments) {
    if (k >= facts.size() || facts[k] != v) return false;
  }
  return true;
}

std::vector<HoldoutPattern> ParseHoldout(const std::string& text,
                                         const FactVocabulary& vocabulary) {
  std::vector<HoldoutPattern> out;
  for (const std::string& part : SplitOn(text, ';')) {
    if (part.empty()) continue;
    HoldoutPattern p;
    for (const std::string& item : SplitOn(part, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("holdout item '" + item + "' must be id=0 or id=1");
      }
      const std::string id = Trim(item.substr(0, eq));
      const std::string value = Trim(item.substr(eq + 1));
      if (value != "0" && value != "1") {
        throw ConfigError("holdout value for '" + id + "' must be 0 or 1");
      }
      const auto k = vocabulary.IndexOf(id);
      if (!k) throw ConfigError("holdout names unknown fact '" + id + "'");
      p.assignments.push_back({*k, static_cast<std::uint8_t>(value == "1")});
    }
    if (p.assignments.empty()) throw ConfigError("empty holdout pattern");
    out.push_back(std::move(p));
  }
  if (out.empty()) throw ConfigError("holdout string names no pattern");
  return out;
}

std::string FormatHoldout(const std::vector<HoldoutPattern>& patterns,
                          const FactVocabulary& vocabulary) {
  std::string out;
  for (std::size_t p = 0; p < patterns.size(); ++p) {
    if (p) out += ';';
    const auto& a = patterns[p].assignments;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (i) out += ',';
      out += vocabulary[a[i].first].id + "=" + (a[i].second ? "1" : "0");
    }
  }
  return out;
}

CompositionalSplit SplitCompositional(std::span<const Scenario> samples,
                                      const std::vector<HoldoutPattern>& patterns,
                                      std::size_t num_classes) {
  CompositionalSplit split;
  std::vector<std::size_t> all_classes(num_classes, 0);
  std::vector<std::size_t> train_classes(num_classes, 0);
  std::size_t n = samples.empty() ? 0 : samples.front().facts.size();
  std::vector<std::array<std::size_t, 2>> all_values(n, {0, 0});
  std::vector<std::array<std::size_t, 2>> train_values(n, {0, 0});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const Scenario& s = samples[i];
    if (s.label < 0 || static_cast<std::size_t>(s.label) >= num_classes) {
      throw ConfigError("sample label out of range");
    }
    bool held = false;
    for (const auto& p : patterns) held = held || p.Matches(s.facts);
    ++all_classes[s.label];
    for (std::size_t k = 0; k < n; ++k) ++all_values[k][s.facts[k]];
    if (held) {
      split.test.push_back(i);
    } else {
      split.train.push_back(i);
      ++train_classes[s.label];
      for (std::size_t k = 0; k < n; ++k) ++train_values[k][s.facts[k]];
    }
  }
  for (std::size_t y = 0; y < num_classes; ++y) {
    if (all_classes[y] > 0 && train_classes[y] == 0) {
      throw ConfigError("holdout removes every training sample of class " +
                        std::to_string(y));
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    for (int v = 0; v < 2; ++v) {
      if (all_values[k][v] > 0 && train_values[k][v] == 0) {
        throw ConfigError("holdout removes every training sample with fact " +
                          std::to_string(k) + "=" + std::to_string(v));
      }
    }
  }
  for (std::size_t i : split.train) {
    for (const auto& p : patterns) {
      if (p.Matches(samples[i].facts)) {
        throw std::logic_error("held-out pattern leaked into training split");
      }
    }
  }
  return split;
}

}  // namespace factrule
