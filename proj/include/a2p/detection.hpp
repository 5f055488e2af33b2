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
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2p/common.hpp"
#include "a2p/model.hpp"
#include "a2p/probe.hpp"
#include "a2p/region.hpp"
#include "a2p/scheduler.hpp"

namespace a2p {

enum class RegionStrategy { kAttention, kRandom };

std::string to_string(RegionStrategy strategy);
RegionStrategy parse_region_strategy(std::string_view name);

struct DetectionConfig {
  RegionSchedule regions;
  RegionStrategy region_strategy = RegionStrategy::kAttention;
  /// Restrict each stage's top-k to the previous region.
  bool nested_regions = true;
  SchedulerConfig scheduler;
  ProbeConfig probe;
  double tau = 3.5;
  int samples_per_class = 4;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const DetectionConfig& config);
DetectionConfig detection_config_from_json(const nlohmann::json& j);

struct StageTrace {
  int stage = 0;
  std::size_t region_size = 0;
  double budget = 0.0;
  double asr_a = 0.0;
  int attempts = 0;
  double max_index = 0.0;
  int argmax_class = 0;
  std::vector<double> scores;
  std::vector<double> indices;
};

struct DetectionReport {
  bool infected = false;
  std::optional<int> suspected_target;
  std::optional<int> stopping_stage;
  double beta = 0.0;
  std::vector<StageTrace> trace;
  int pgd_calls = 0;
  std::size_t planned_stages = 0;
  std::vector<std::string> diagnostics;
  double wall_time_seconds = 0.0;
  DetectionConfig config;

  /// Largest anomaly index over every executed stage.
  double max_anomaly_index() const;
};

/// Report as JSON. Wall time is left out unless asked for so that reruns
/// with the same inputs produce identical bytes.
nlohmann::json to_json(const DetectionReport& report, bool include_timing = false);
DetectionReport detection_report_from_json(const nlohmann::json& j);

/// Probes of the stopping stage (or the last stage for a clean verdict).
struct ProbeArchive {
  int stage = 0;
  double budget = 0.0;
  ImageBatch images;
  std::vector<double> probes;

  /// manifest.json + images.f64 + probes.f64 + labels.i32
  void save(const std::filesystem::path& dir) const;
  static ProbeArchive load(const std::filesystem::path& dir);
};

struct DetectionRun {
  DetectionReport report;
  ProbeArchive archive;
};

/// Global-to-local detection: stage 0 probes the whole image at the initial
/// budget and fixes beta; every later stage shrinks the region, schedules the
/// budget, probes, and runs the MAD test. Stops at the first stage whose max
/// anomaly index exceeds tau.
DetectionRun detect(const Classifier& model, const ImageBatch& probe_set,
                    const DetectionConfig& config);

}  // namespace a2p
