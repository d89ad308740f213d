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

#include "factrule/optimizer.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "factrule/errors.h"

namespace factrule {

double LrSchedule::At(double epoch) const {
  if (epoch <= 0) return 0.0;
  if (epoch < warmup_epochs) return base_lr * epoch / warmup_epochs;
  if (epoch >= total_epochs) return 0.0;
  const double progress =
      (epoch - warmup_epochs) / std::max(total_epochs - warmup_epochs, 1e-12);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

AdamW::AdamW(const ParamStore& params, AdamWConfig config,
             LrSchedule schedule, std::int64_t steps_per_epoch)
    : config_(config),
      schedule_(schedule),
      steps_per_epoch_(std::max<std::int64_t>(steps_per_epoch, 1)) {
  if (schedule_.base_lr < 0 || config_.weight_decay < 0) {
    throw ConfigError("learning rate and weight decay must be non-negative");
  }
  for (const auto& g : params.groups()) {
    m_.emplace_back(g.size(), 0.0);
    v_.emplace_back(g.size(), 0.0);
    t_.push_back(0);
  }
}

double AdamW::CurrentEpoch() const {
  return static_cast<double>(step_) / static_cast<double>(steps_per_epoch_);
}

double AdamW::CurrentLr() const { return schedule_.At(CurrentEpoch()); }

// Taken at the midpoint of the step so the first update of the warmup ramp is
// non-zero.
double AdamW::NextLr() const {
  return schedule_.At((static_cast<double>(step_) + 0.5) /
                      static_cast<double>(steps_per_epoch_));
}

void AdamW::Step(ParamStore& params, const std::set<std::string>& trainable) {
  auto& groups = params.groups();
  if (groups.size() != m_.size()) {
    throw ConfigError("optimizer state does not match parameter layout");
  }
  params.CheckFiniteGrads();
  const double lr = NextLr();
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto& g = groups[gi];
    if (!trainable.empty() && !trainable.contains(g.name)) continue;
    if (g.grad.size() != g.value.size()) {
      throw ConfigError("gradient shape mismatch in group " + g.name);
    }
    const std::int64_t t = ++t_[gi];
    const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t));
    auto& m = m_[gi];
    auto& v = v_[gi];
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double grad = g.grad[i];
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * grad;
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * grad * grad;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      g.value[i] -= lr * (m_hat / (std::sqrt(v_hat) + config_.eps) +
                          config_.weight_decay * g.value[i]);
    }
  }
  ++step_;
}

}  // namespace factrule
