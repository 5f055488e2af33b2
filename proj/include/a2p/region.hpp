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
#include <stdexcept>
#include <vector>

#include "a2p/common.hpp"
#include "a2p/probe.hpp"

namespace a2p {

/// Shrinking a region would leave zero pixels.
class ScheduleExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegionSchedule {
  double alpha = 0.5;
  double stop_fraction = 0.03;

  void validate() const;
};

/// Per-pixel L2 norm of the gradient across channels, one H*W plane per image.
std::vector<double> pixel_saliency(const GradientBatch& grad);

/// Keeps, per image, the floor(alpha * |prev|) pixels with the largest
/// channel-aggregated |gradient|. Ties go to the lower row-major index.
/// With `nested` the choice is restricted to pixels inside `prev`; otherwise
/// the whole image competes and only the count comes from `prev`.
RegionMasks attention_region(const GradientBatch& grad, const RegionMasks& prev, double alpha,
                             bool nested = true);

/// Uniform draw without replacement of floor(alpha * |prev|) pixels of each
/// previous region.
RegionMasks random_region(const RegionMasks& prev, double alpha, std::uint64_t seed);

/// Region cardinalities [H*W, floor(alpha*H*W), ...] ending before the first
/// value below ceil(stop_fraction * H*W).
std::vector<std::size_t> stage_plan(ImageShape shape, const RegionSchedule& schedule);

/// Square region of `side` pixels anchored at one of the image corners.
RegionMasks corner_region(std::size_t count, ImageShape shape, int side, bool bottom, bool right);

}  // namespace a2p
