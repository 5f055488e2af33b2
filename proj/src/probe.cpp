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

#include "a2p/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "a2p/rng.hpp"

namespace a2p {

std::size_t RegionMasks::cardinality(std::size_t i) const {
  const auto m = mask(i);
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), std::uint8_t{1}));
}

std::size_t RegionMasks::common_cardinality() const {
  if (count() == 0) return 0;
  const std::size_t k = cardinality(0);
  for (std::size_t i = 1; i < count(); ++i) {
    if (cardinality(i) != k) throw InputError("region masks differ in cardinality");
  }
  return k;
}

void ProbeConfig::validate() const {
  if (steps < 1) throw InputError("probe steps must be >= 1");
  if (!(step_size > 0.0)) throw InputError("probe step size must be positive");
  if (step_rule == StepRule::kBudgetScaled && !(budget_step_fraction > 0.0)) {
    throw InputError("budget step fraction must be positive");
  }
}

namespace {

// Largest-magnitude p no further from `target` than needed so that
// |p| <= budget and x + p stays in [0,1] when evaluated in floating point.
double project(double x, double target, double budget) {
  double p = std::clamp(target, -budget, budget);
  if (x + p > 1.0) p = 1.0 - x;
  if (x + p < 0.0) p = -x;
  while (x + p > 1.0 || p > budget) p = std::nextafter(p, -1.0);
  while (x + p < 0.0 || p < -budget) p = std::nextafter(p, 1.0);
  return p;
}

}  // namespace

ImageBatch probed_batch(const ImageBatch& batch, std::span<const double> probes) {
  if (probes.size() != batch.pixels.size()) throw InputError("probes must be shaped like the batch");
  ImageBatch out = batch;
  for (std::size_t j = 0; j < probes.size(); ++j) out.pixels[j] += probes[j];
  return out;
}

double asr_a(const Classifier& model, const ImageBatch& batch, std::span<const double> probes) {
  if (batch.empty()) return 0.0;
  const auto pred = model.predict(probed_batch(batch, probes));
  std::size_t flips = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) flips += pred[i] != batch.labels[i];
  return static_cast<double>(flips) / static_cast<double>(pred.size());
}

ProbeState masked_pgd(const Classifier& model, const ImageBatch& batch, const RegionMasks& regions,
                      double budget, const ProbeConfig& config) {
  config.validate();
  if (!(budget > 0.0 && budget <= 1.0)) throw InputError("probe budget must lie in (0,1]");
  const ImageShape shape = batch.shape;
  if (regions.count() != batch.size() || regions.height != shape.height ||
      regions.width != shape.width) {
    throw InputError("region masks must be H x W per image of the batch");
  }
  for (std::uint8_t b : regions.bits) {
    if (b > 1) throw InputError("region masks must be binary");
  }
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (regions.cardinality(i) == 0) {
      throw InputError("region for image " + std::to_string(i) + " is empty (no probe support)");
    }
  }

  const std::size_t hw = shape.pixels();
  const std::size_t per_image = shape.size();
  // Expand masks to pixel layout once.
  std::vector<std::uint8_t> support(batch.pixels.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto m = regions.mask(i);
    for (int c = 0; c < shape.channels; ++c) {
      std::copy(m.begin(), m.end(), support.begin() + i * per_image + c * hw);
    }
  }

  std::vector<double> delta(batch.pixels.size(), 0.0);
  if (config.random_start) {
    Rng rng(derive_seed(config.seed, "pgd_start"));
    for (std::size_t j = 0; j < delta.size(); ++j) {
      const double r = rng.uniform(-budget, budget);
      delta[j] = support[j] ? project(batch.pixels[j], r, budget) : 0.0;
    }
  }

  const double step = config.step_for(budget);
  ImageBatch adv = batch;
  for (int it = 0; it < config.steps; ++it) {
    for (std::size_t j = 0; j < delta.size(); ++j) adv.pixels[j] = batch.pixels[j] + delta[j];
    const GradientBatch grad = model.input_gradient(adv);
    for (std::size_t j = 0; j < delta.size(); ++j) {
      if (!support[j]) {
        delta[j] = 0.0;
        continue;
      }
      const double g = grad.values[j];
      const double s = g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
      delta[j] = project(batch.pixels[j], delta[j] + step * s, budget);
    }
  }

  ProbeState state;
  state.regions = regions;
  state.budget = budget;
  state.probes = std::move(delta);
  for (std::size_t j = 0; j < adv.pixels.size(); ++j) {
    adv.pixels[j] = batch.pixels[j] + state.probes[j];
  }
  state.predictions = model.predict(adv);
  std::size_t flips = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) flips += state.predictions[i] != batch.labels[i];
  state.asr_a = batch.empty() ? 0.0 : static_cast<double>(flips) / static_cast<double>(batch.size());
  return state;
}

}  // namespace a2p
