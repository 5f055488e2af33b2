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

#include "a2p/training.hpp"

#include "a2p/data.hpp"
#include "a2p/io.hpp"
#include "a2p/rng.hpp"

namespace a2p {

nlohmann::json to_json(const TrainConfig& config) {
  return {
      {"architecture", to_string(config.arch)},
      {"epochs", config.epochs},
      {"learning_rate", config.sgd.learning_rate},
      {"momentum", config.sgd.momentum},
      {"weight_decay", config.sgd.weight_decay},
      {"batch_size", config.sgd.batch_size},
  };
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    if (j.contains("architecture")) {
      c.arch = parse_architecture(j.at("architecture").get<std::string>());
    }
    c.epochs = j.value("epochs", c.epochs);
    c.sgd.learning_rate = j.value("learning_rate", c.sgd.learning_rate);
    c.sgd.momentum = j.value("momentum", c.sgd.momentum);
    c.sgd.weight_decay = j.value("weight_decay", c.sgd.weight_decay);
    c.sgd.batch_size = j.value("batch_size", c.sgd.batch_size);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad training config: ") + e.what());
  }
  if (c.epochs < 0) throw InputError("epochs must be >= 0");
  if (c.sgd.batch_size < 1) throw InputError("batch_size must be >= 1");
  if (!(c.sgd.learning_rate > 0.0)) throw InputError("learning_rate must be > 0");
  return c;
}

nlohmann::json to_json(const TrainReport& report) {
  nlohmann::json j = {
      {"clean_accuracy", report.clean_accuracy},
      {"asr_b", report.asr_b ? nlohmann::json(*report.asr_b) : nlohmann::json(nullptr)},
      {"epochs", report.epochs},
      {"seed", report.seed},
      {"attack_id", report.attack_id},
      {"final_train_loss", io::number(report.final_train_loss)},
  };
  j["trigger"] = report.trigger ? to_json(*report.trigger) : nlohmann::json(nullptr);
  return j;
}

TrainReport train_report_from_json(const nlohmann::json& j) {
  TrainReport r;
  r.clean_accuracy = j.at("clean_accuracy").get<double>();
  if (!j.at("asr_b").is_null()) r.asr_b = j.at("asr_b").get<double>();
  r.epochs = j.at("epochs").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.attack_id = j.at("attack_id").get<std::string>();
  r.final_train_loss = io::to_double(j.at("final_train_loss"));
  if (j.contains("trigger") && !j.at("trigger").is_null()) {
    r.trigger = trigger_from_json(j.at("trigger"));
  }
  return r;
}

Evaluation evaluate(const Classifier& model, const ImageBatch& clean_set,
                    const TriggerSpec* trigger) {
  Evaluation ev;
  if (clean_set.empty()) return ev;
  const auto pred = model.predict(clean_set);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i] == clean_set.labels[i];
  ev.clean_accuracy = static_cast<double>(correct) / static_cast<double>(pred.size());

  if (trigger) {
    const auto keep = indices_without_label(clean_set, trigger->target_label);
    if (keep.empty()) {
      ev.asr_b = 0.0;
      return ev;
    }
    const ImageBatch triggered = apply_trigger(clean_set.subset(keep), *trigger);
    const auto tpred = model.predict(triggered);
    std::size_t hits = 0;
    for (int p : tpred) hits += p == trigger->target_label;
    ev.asr_b = static_cast<double>(hits) / static_cast<double>(tpred.size());
  }
  return ev;
}

TrainedModel train_model(const Dataset& train, const Dataset& test, const TrainConfig& config,
                         const std::optional<PoisonPlan>& plan, std::uint64_t seed) {
  train.data.validate(train.num_classes);
  if (train.size() == 0) throw InputError("training set is empty");
  if (test.data.shape != train.data.shape || test.num_classes != train.num_classes) {
    throw InputError("test split does not match the training split");
  }

  Dataset effective = train;
  if (plan) effective = poison_dataset(train, *plan, derive_seed(seed, "poison")).dataset;

  Classifier init(config.arch, train.data.shape, train.num_classes, derive_seed(seed, "init"));
  Classifier model =
      fine_tune(init, effective, config.epochs, config.sgd, derive_seed(seed, "shuffle"));

  ModelMetadata md;
  md.seed = seed;
  md.dataset_id = train.name + "@" + std::to_string(train.seed);
  if (plan) {
    md.attack_id = plan->trigger.attack_id();
    md.target_label = plan->target_label();
  }
  model.set_metadata(md);

  TrainReport report;
  const Evaluation ev = evaluate(model, test.data, plan ? &plan->trigger : nullptr);
  report.clean_accuracy = ev.clean_accuracy;
  report.asr_b = ev.asr_b;
  report.epochs = config.epochs;
  report.seed = seed;
  report.attack_id = md.attack_id;
  if (plan) report.trigger = plan->trigger;
  report.final_train_loss = model.mean_loss(effective.data);
  if (!std::isfinite(report.final_train_loss)) {
    throw TrainingError("training ended with a non-finite loss (seed " + std::to_string(seed) +
                        ", attack " + md.attack_id + ")");
  }
  return {std::move(model), std::move(report)};
}

}  // namespace a2p
