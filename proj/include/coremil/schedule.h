/*
 * Copyright 2026 The coremil Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef COREMIL_SCHEDULE_H_
#define COREMIL_SCHEDULE_H_

#include <cmath>
#include <numbers>

#include "coremil/errors.h"

namespace coremil {

// Linear warmup from 0 to peak over warmup_steps, then cosine annealing from
// peak to final_lr at total_steps. Steps past total_steps hold final_lr.
class WarmupCosineSchedule {
 public:
  WarmupCosineSchedule(double peak_lr, long warmup_steps, long total_steps,
                       double final_lr = 0.0)
      : peak_(peak_lr), final_(final_lr), warmup_(warmup_steps), total_(total_steps) {
    if (warmup_steps < 0 || total_steps < 1 || warmup_steps > total_steps) {
      throw InvalidArgument("schedule needs 0 <= warmup_steps <= total_steps, total_steps >= 1");
    }
  }

  double At(long step) const {
    if (step < warmup_) return peak_ * static_cast<double>(step) / static_cast<double>(warmup_);
    if (step >= total_) return final_;
    const double progress = static_cast<double>(step - warmup_) /
                            static_cast<double>(std::max(1L, total_ - warmup_));
    return final_ + 0.5 * (peak_ - final_) * (1.0 + std::cos(std::numbers::pi * progress));
  }

  double peak() const { return peak_; }
  long warmup_steps() const { return warmup_; }
  long total_steps() const { return total_; }

 private:
  double peak_;
  double final_;
  long warmup_;
  long total_;
};

}  // namespace coremil

#endif  // COREMIL_SCHEDULE_H_
