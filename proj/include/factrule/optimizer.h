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

#ifndef FACTRULE_OPTIMIZER_H_
#define FACTRULE_OPTIMIZER_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "factrule/param_store.h"

namespace factrule {

// Linear warmup followed by cosine decay to zero, evaluated on a fractional
// epoch position.
struct LrSchedule {
  double base_lr = 1e-4;
  double warmup_epochs = 5;
  double total_epochs = 100;

  double At(double epoch) const;
};

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

// Decoupled-weight-decay Adam. Moment buffers mirror the ParamStore layout.
class AdamW {
 public:
  AdamW(const ParamStore& params, AdamWConfig config, LrSchedule schedule,
        std::int64_t steps_per_epoch);

  // Applies one update to every group whose name is in `trainable` (all
  // groups when empty). Throws NumericalError on a non-finite gradient.
  void Step(ParamStore& params, const std::set<std::string>& trainable = {});

  double CurrentLr() const;
  // Learning rate the next call to Step() will apply.
  double NextLr() const;
  double CurrentEpoch() const;
  std::int64_t step() const { return step_; }
  const AdamWConfig& config() const { return config_; }
  const LrSchedule& schedule() const { return schedule_; }

 private:
  AdamWConfig config_;
  LrSchedule schedule_;
  std::int64_t steps_per_epoch_;
  std::int64_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  // Per-group update count for bias correction.
  std::vector<std::int64_t> t_;
};

}  // namespace factrule

#endif  // FACTRULE_OPTIMIZER_H_
