/**
 * Copyright (c) 2026-present, The a2p Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "a2p/common.hpp"
#include "a2p/model.hpp"

namespace a2p {

/// One binary H x W mask per image.
struct RegionMasks {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> bits;  // count * height * width, 0 or 1

  RegionMasks() = default;
  RegionMasks(std::size_t count, int h, int w, std::uint8_t fill = 0)
      : height(h), width(w), bits(count * static_cast<std::size_t>(h) * w, fill) {}

  static RegionMasks full(std::size_t count, int h, int w) { return {count, h, w, 1}; }

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::size_t count() const { return pixels() == 0 ? 0 : bits.size() / pixels(); }
  std::span<std::uint8_t> mask(std::size_t i) { return {bits.data() + i * pixels(), pixels()}; }
  std::span<const std::uint8_t> mask(std::size_t i) const {
    return {bits.data() + i * pixels(), pixels()};
  }
  std::size_t cardinality(std::size_t i) const;
  /// Cardinality shared by every mask, or throws if they differ.
  std::size_t common_cardinality() const;
};

/// How the per-step PGD size is chosen. kFixed uses `step_size`;
/// kBudgetScaled uses budget * budget_step_fraction.
enum class StepRule { kFixed, kBudgetScaled };

struct ProbeConfig {
  int steps = 40;
  double step_size = 0.001;
  bool random_start = false;
  StepRule step_rule = StepRule::kFixed;
  double budget_step_fraction = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
  double step_for(double budget) const {
    return step_rule == StepRule::kFixed ? step_size : budget * budget_step_fraction;
  }
};

/// Result of one masked PGD run. `probes` has the batch's pixel layout and
/// obeys: zero wherever the region is 0, |p| <= budget, x + p in [0,1].
struct ProbeState {
  RegionMasks regions;
  double budget = 0.0;
  std::vector<double> probes;
  std::vector<int> predictions;
  double asr_a = 0.0;
};

/// Untargeted sign-gradient ascent on cross-entropy restricted to `regions`
/// for exactly config.steps iterations, then ASR-A of the final probes.
ProbeState masked_pgd(const Classifier& model, const ImageBatch& batch, const RegionMasks& regions,
                      double budget, const ProbeConfig& config);

/// Fraction of images whose prediction on x + p differs from the label.
double asr_a(const Classifier& model, const ImageBatch& batch, std::span<const double> probes);

/// x + p as a batch with the original labels.
ImageBatch probed_batch(const ImageBatch& batch, std::span<const double> probes);

}  // namespace a2p
