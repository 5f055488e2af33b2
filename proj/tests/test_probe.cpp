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

#include <cmath>

#include <gtest/gtest.h>

#include "a2p/probe.hpp"
#include "a2p/rng.hpp"

using namespace a2p;

namespace {

ImageBatch random_batch(ImageShape shape, std::size_t n, int classes, Rng& rng) {
  ImageBatch b(shape, n);
  for (double& v : b.pixels) {
    // Include saturated pixels so the box constraint is exercised.
    const double u = rng.uniform();
    v = u < 0.1 ? 0.0 : (u > 0.9 ? 1.0 : rng.uniform());
  }
  for (int& y : b.labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return b;
}

RegionMasks random_masks(std::size_t n, ImageShape shape, Rng& rng) {
  RegionMasks r(n, shape.height, shape.width);
  const std::size_t k = 1 + rng.below(shape.pixels());
  for (std::size_t i = 0; i < n; ++i) {
    auto m = r.mask(i);
    for (std::size_t j : rng.sample_without_replacement(shape.pixels(), k)) m[j] = 1;
  }
  return r;
}

}  // namespace

TEST(MaskedPgd, InvariantsHoldOnRandomInstances) {
  Rng rng(2024);
  const Classifier linear(Architecture::kLinear, {3, 6, 6}, 4, 1);
  const Classifier mlp(Architecture::kMlp, {2, 4, 4}, 3, 2);
  const Classifier cnn(Architecture::kSmallCnn, {3, 8, 8}, 5, 3);
  for (int trial = 0; trial < 1000; ++trial) {
    const Classifier& m = trial % 10 == 0 ? cnn : (trial % 2 ? linear : mlp);
    const ImageShape shape = m.input_shape();
    const std::size_t n = 1 + rng.below(3);
    const ImageBatch b = random_batch(shape, n, m.num_classes(), rng);
    const RegionMasks r = random_masks(n, shape, rng);
    const double budget = rng.uniform() < 0.1 ? 1.0 : rng.uniform(1e-6, 0.5);
    ProbeConfig cfg;
    cfg.steps = 1 + static_cast<int>(rng.below(6));
    cfg.step_rule = trial % 3 == 0 ? StepRule::kBudgetScaled : StepRule::kFixed;
    cfg.step_size = rng.uniform(1e-3, 0.3);
    cfg.random_start = trial % 4 == 0;
    cfg.seed = static_cast<std::uint64_t>(trial);
    const ProbeState s = masked_pgd(m, b, r, budget, cfg);
    ASSERT_EQ(s.probes.size(), b.pixels.size());
    const std::size_t hw = shape.pixels();
    for (std::size_t i = 0; i < n; ++i) {
      const auto mask = r.mask(i);
      for (int c = 0; c < shape.channels; ++c) {
        for (std::size_t p = 0; p < hw; ++p) {
          const std::size_t j = i * shape.size() + static_cast<std::size_t>(c) * hw + p;
          const double d = s.probes[j];
          ASSERT_LE(std::abs(d), budget) << "trial " << trial;
          if (!mask[p]) {
            ASSERT_EQ(d, 0.0) << "trial " << trial;
          }
          const double x = b.pixels[j] + d;
          ASSERT_GE(x, 0.0) << "trial " << trial;
          ASSERT_LE(x, 1.0) << "trial " << trial;
        }
      }
    }
  }
}

TEST(MaskedPgd, LinearStepMovesTowardTheOtherClass) {
  // Two classes on a 1x2x2 image; the weight gap decides each pixel's sign.
  Tensor w{"fc.weight", {2, 4}, {0.5f, -1.0f, 2.0f, 0.0f, -0.5f, 1.0f, 1.0f, 0.0f}};
  Tensor b{"fc.bias", {2}, {0.0f, 0.0f}};
  const Classifier m(Architecture::kLinear, {1, 2, 2}, 2, {w, b});
  ImageBatch x({1, 2, 2}, 1);
  x.pixels = {0.5, 0.5, 0.5, 0.5};
  x.labels = {0};
  RegionMasks r(1, 2, 2);
  r.bits = {1, 1, 1, 0};
  ProbeConfig cfg;
  cfg.steps = 1;
  cfg.step_size = 0.01;
  const ProbeState s = masked_pgd(m, x, r, 0.1, cfg);
  // sign(w1 - w0) = -, +, -, 0 ; last pixel is outside the mask.
  EXPECT_EQ(s.probes, (std::vector<double>{-0.01, 0.01, -0.01, 0.0}));
}

TEST(MaskedPgd, AsrIsFractionOfFlips) {
  Tensor w{"fc.weight", {2, 2}, {1.0f, 0.0f, 0.0f, 1.0f}};
  Tensor b{"fc.bias", {2}, {0.0f, 0.0f}};
  const Classifier m(Architecture::kLinear, {1, 1, 2}, 2, {w, b});
  ImageBatch x({1, 1, 2}, 3);
  x.pixels = {0.9, 0.1, 0.2, 0.8, 0.6, 0.4};
  x.labels = {0, 1, 0};
  const std::vector<double> zero(6, 0.0);
  EXPECT_DOUBLE_EQ(asr_a(m, x, zero), 0.0);
  std::vector<double> p(6, 0.0);
  p[4] = -0.3;  // third sample becomes (0.3, 0.4) -> class 1
  EXPECT_DOUBLE_EQ(asr_a(m, x, p), 1.0 / 3.0);
}

TEST(MaskedPgd, RejectsBadArguments) {
  const Classifier m(Architecture::kLinear, {1, 2, 2}, 2, 0);
  ImageBatch x({1, 2, 2}, 1);
  RegionMasks empty(1, 2, 2);
  EXPECT_THROW(masked_pgd(m, x, empty, 0.1, {}), InputError);
  const RegionMasks full = RegionMasks::full(1, 2, 2);
  EXPECT_THROW(masked_pgd(m, x, full, 0.0, {}), InputError);
  EXPECT_THROW(masked_pgd(m, x, full, 1.5, {}), InputError);
  EXPECT_THROW(masked_pgd(m, x, RegionMasks::full(2, 2, 2), 0.1, {}), InputError);
  ProbeConfig bad;
  bad.steps = 0;
  EXPECT_THROW(masked_pgd(m, x, full, 0.1, bad), InputError);
}

TEST(MaskedPgd, SameSeedSameProbes) {
  Rng rng(1);
  const Classifier m(Architecture::kMlp, {3, 4, 4}, 3, 5);
  const ImageBatch b = random_batch({3, 4, 4}, 4, 3, rng);
  ProbeConfig cfg;
  cfg.random_start = true;
  cfg.seed = 12;
  const RegionMasks full = RegionMasks::full(4, 4, 4);
  EXPECT_EQ(masked_pgd(m, b, full, 0.05, cfg).probes, masked_pgd(m, b, full, 0.05, cfg).probes);
}
