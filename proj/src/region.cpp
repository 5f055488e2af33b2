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

#include "a2p/region.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "a2p/rng.hpp"

namespace a2p {

void RegionSchedule::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  if (!(stop_fraction > 0.0 && stop_fraction <= 1.0)) {
    throw InputError("stop fraction must lie in (0,1]");
  }
}

namespace {

std::size_t shrunk(std::size_t n, double alpha) {
  return static_cast<std::size_t>(std::floor(alpha * static_cast<double>(n)));
}

void check_prev(const RegionMasks& prev, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
  for (std::uint8_t b : prev.bits) {
    if (b > 1) throw InputError("previous regions must be binary");
  }
}

}  // namespace

std::vector<double> pixel_saliency(const GradientBatch& grad) {
  const std::size_t hw = grad.shape.pixels();
  const std::size_t n = grad.size();
  std::vector<double> out(n * hw, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto g = grad.image(i);
    for (int c = 0; c < grad.shape.channels; ++c) {
      for (std::size_t p = 0; p < hw; ++p) {
        const double v = g[c * hw + p];
        out[i * hw + p] += v * v;
      }
    }
    for (std::size_t p = 0; p < hw; ++p) out[i * hw + p] = std::sqrt(out[i * hw + p]);
  }
  return out;
}

RegionMasks attention_region(const GradientBatch& grad, const RegionMasks& prev, double alpha,
                             bool nested) {
  check_prev(prev, alpha);
  if (grad.shape.height != prev.height || grad.shape.width != prev.width ||
      grad.size() != prev.count()) {
    throw InputError("gradient batch does not match the previous regions");
  }
  const std::size_t k = shrunk(prev.common_cardinality(), alpha);
  if (k == 0) throw ScheduleExhausted("region cannot shrink below one pixel");

  const std::vector<double> sal = pixel_saliency(grad);
  const std::size_t hw = prev.pixels();
  RegionMasks out(prev.count(), prev.height, prev.width);
  std::vector<std::size_t> cand;
  for (std::size_t i = 0; i < prev.count(); ++i) {
    const auto pm = prev.mask(i);
    cand.clear();
    for (std::size_t p = 0; p < hw; ++p) {
      if (!nested || pm[p]) cand.push_back(p);
    }
    const double* s = sal.data() + i * hw;
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end(),
                      [s](std::size_t a, std::size_t b) {
                        return s[a] > s[b] || (s[a] == s[b] && a < b);
                      });
    auto m = out.mask(i);
    for (std::size_t j = 0; j < k; ++j) m[cand[j]] = 1;
  }
  return out;
}

RegionMasks random_region(const RegionMasks& prev, double alpha, std::uint64_t seed) {
  check_prev(prev, alpha);
  const std::size_t k = shrunk(prev.common_cardinality(), alpha);
  if (k == 0) throw ScheduleExhausted("region cannot shrink below one pixel");
  const std::size_t hw = prev.pixels();
  RegionMasks out(prev.count(), prev.height, prev.width);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < prev.count(); ++i) {
    const auto pm = prev.mask(i);
    members.clear();
    for (std::size_t p = 0; p < hw; ++p) {
      if (pm[p]) members.push_back(p);
    }
    Rng rng(derive_seed(seed, "random_region", i));
    auto m = out.mask(i);
    for (std::size_t j : rng.sample_without_replacement(members.size(), k)) m[members[j]] = 1;
  }
  return out;
}

std::vector<std::size_t> stage_plan(ImageShape shape, const RegionSchedule& schedule) {
  schedule.validate();
  const std::size_t total = shape.pixels();
  const auto floor_size =
      static_cast<std::size_t>(std::ceil(schedule.stop_fraction * static_cast<double>(total)));
  std::vector<std::size_t> plan;
  for (std::size_t n = total; n >= 1 && n >= floor_size; n = shrunk(n, schedule.alpha)) {
    plan.push_back(n);
  }
  return plan;
}

RegionMasks corner_region(std::size_t count, ImageShape shape, int side, bool bottom,
                          bool right) {
  if (side < 1 || side > shape.height || side > shape.width) {
    throw InputError("corner region does not fit the image");
  }
  RegionMasks out(count, shape.height, shape.width);
  const int r0 = bottom ? shape.height - side : 0;
  const int c0 = right ? shape.width - side : 0;
  for (std::size_t i = 0; i < count; ++i) {
    auto m = out.mask(i);
    for (int y = r0; y < r0 + side; ++y) {
      for (int x = c0; x < c0 + side; ++x) m[static_cast<std::size_t>(y) * shape.width + x] = 1;
    }
  }
  return out;
}

}  // namespace a2p
