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

#include <nlohmann/json.hpp>

#include "a2p/common.hpp"
#include "a2p/model.hpp"
#include "a2p/trigger.hpp"

namespace a2p {

struct TrainConfig {
  Architecture arch = Architecture::kSmallCnn;
  int epochs = 10;
  SgdConfig sgd;
};

nlohmann::json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// C-ACC and ASR-b measured on held-out data after training.
struct TrainReport {
  double clean_accuracy = 0.0;
  std::optional<double> asr_b;  // absent for clean models
  int epochs = 0;
  std::uint64_t seed = 0;
  std::string attack_id = "clean";
  std::optional<TriggerSpec> trigger;
  double final_train_loss = 0.0;
};

nlohmann::json to_json(const TrainReport& report);
TrainReport train_report_from_json(const nlohmann::json& j);

struct Evaluation {
  double clean_accuracy = 0.0;
  std::optional<double> asr_b;
};

/// clean_accuracy over `clean_set`; with a trigger, asr_b is the fraction of
/// samples whose true label is not the target that land on the target after
/// the trigger is applied.
Evaluation evaluate(const Classifier& model, const ImageBatch& clean_set,
                    const TriggerSpec* trigger);

struct TrainedModel {
  Classifier model;
  TrainReport report;
};

/// Trains from scratch, poisoning `train` first when a plan is given. The
/// returned model's metadata records seed, dataset and attack.
TrainedModel train_model(const Dataset& train, const Dataset& test, const TrainConfig& config,
                         const std::optional<PoisonPlan>& plan, std::uint64_t seed);

}  // namespace a2p
