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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2p/detection.hpp"
#include "a2p/model.hpp"
#include "a2p/training.hpp"
#include "a2p/trigger.hpp"

namespace a2p {

enum class UnlearnMode { kReversedTrigger, kOriginalTrigger, kRandomNoise, kNoPatching };

std::string to_string(UnlearnMode mode);
UnlearnMode parse_unlearn_mode(std::string_view name);

struct UnlearnConfig {
  /// Share of the training set drawn for fine-tuning.
  double subset_fraction = 0.10;
  /// Share of that subset that gets patched.
  double patch_fraction = 0.20;
  int epochs = 1;
  /// Fine-tuning rate = lr_scale * sgd.learning_rate.
  double lr_scale = 0.1;
  SgdConfig sgd;
  /// l-inf magnitude of random_noise patches; the archive budget when unset.
  std::optional<double> noise_magnitude;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const UnlearnConfig& config);
UnlearnConfig unlearn_config_from_json(const nlohmann::json& j);

struct UnlearnReport {
  UnlearnMode mode = UnlearnMode::kNoPatching;
  Evaluation before;
  Evaluation after;
  std::size_t subset_size = 0;
  std::vector<std::size_t> patched_indices;  // positions in the training set
  UnlearnConfig config;
};

nlohmann::json to_json(const UnlearnReport& report);

struct UnlearnResult {
  Classifier model;
  UnlearnReport report;
};

/// Fine-tunes on floor(subset_fraction * n) seeded training samples, of which
/// floor(patch_fraction * subset) are patched according to `mode` while
/// keeping their labels. C-ACC and ASR-b are measured on `test` with
/// `trigger` before and after.
///
/// reversed_trigger needs `archive` (its probes are added cyclically);
/// original_trigger needs `trigger`; random_noise adds uniform noise in
/// [-m, m] with m = noise_magnitude or the archive budget.
UnlearnResult unlearn(const Classifier& model, const Dataset& train, const Dataset& test,
                      const ProbeArchive* archive, const TriggerSpec* trigger, UnlearnMode mode,
                      const UnlearnConfig& config);

}  // namespace a2p
