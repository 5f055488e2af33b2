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
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2p/data.hpp"
#include "a2p/model.hpp"
#include "a2p/training.hpp"
#include "a2p/trigger.hpp"

namespace a2p {

/// Environment variable naming the registry root.
inline constexpr const char* kRegistryEnv = "A2P_REGISTRY";

/// Append-only model store: `<root>/<id>/{model.bin, train_report.json}`.
/// Adding an id that already exists is an error; nothing is ever replaced.
class Registry {
 public:
  explicit Registry(std::filesystem::path root);

  /// $A2P_REGISTRY when set, otherwise ./registry.
  static std::filesystem::path default_root();

  const std::filesystem::path& root() const { return root_; }
  bool contains(const std::string& id) const;
  std::vector<std::string> ids() const;

  /// Writes into a staging directory and renames it into place. Throws
  /// InputError if `id` is taken or not a plain name.
  void add(const std::string& id, const Classifier& model, const TrainReport& report);

  Classifier load_model(const std::string& id) const;
  TrainReport load_report(const std::string& id) const;

 private:
  std::filesystem::path root_;
  mutable std::mutex mutex_;
};

/// Desk-scale model zoo settings: data, training and poisoning defaults.
struct ZooConfig {
  int models_per_kind = 8;
  int num_classes = 10;
  ImageShape shape{3, 16, 16};
  int train_per_class = 200;
  int test_per_class = 50;
  std::uint64_t data_seed = 1;
  TrainConfig train;
  double poison_rate = 0.10;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const ZooConfig& config);
ZooConfig zoo_config_from_json(const nlohmann::json& j);

/// Train/test splits generated from the zoo's data seed.
DatasetSplits zoo_data(const ZooConfig& config);

/// One zoo member: registry id, optional poison plan, training seed.
struct ModelSpec {
  std::string id;
  std::optional<PoisonPlan> plan;
  std::uint64_t seed = 0;

  bool infected() const { return plan.has_value(); }
};

/// `count` specs for one attack family. `make_trigger(i)` gives the trigger of
/// member i with its target label already set; nullptr makes clean models.
/// Ids combine the attack id, the member index and a digest of the zoo
/// config so that different zoos never share registry entries.
std::vector<ModelSpec> zoo_members(const ZooConfig& config, const std::string& family,
                                   const std::function<TriggerSpec(int)>& make_trigger);

/// Seeded target label of member `index` of `family`.
int zoo_target(const ZooConfig& config, const std::string& family, int index);

/// Trains and registers every spec missing from the registry, `workers`
/// at a time. Returns the ids that were trained.
std::vector<std::string> ensure_models(Registry& registry, const ZooConfig& config,
                                       const std::vector<ModelSpec>& specs, int workers);

/// Runs fn(i) for i in [0, n) on up to `workers` threads. The first
/// exception is rethrown after all threads finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace a2p
