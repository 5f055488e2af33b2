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

#include "a2p/registry.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <thread>

#include "a2p/io.hpp"
#include "a2p/rng.hpp"

namespace a2p {

namespace fs = std::filesystem;

namespace {

bool plain_name(const std::string& id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
  });
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace

Registry::Registry(fs::path root) : root_(std::move(root)) {}

fs::path Registry::default_root() {
  if (const char* env = std::getenv(kRegistryEnv); env && *env) return fs::path(env);
  return fs::path("registry");
}

bool Registry::contains(const std::string& id) const {
  return fs::exists(root_ / id / "model.bin") && fs::exists(root_ / id / "train_report.json");
}

std::vector<std::string> Registry::ids() const {
  std::vector<std::string> out;
  if (!fs::is_directory(root_)) return out;
  for (const auto& entry : fs::directory_iterator(root_)) {
    const auto name = entry.path().filename().string();
    if (entry.is_directory() && !name.starts_with(".") && contains(name)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void Registry::add(const std::string& id, const Classifier& model, const TrainReport& report) {
  if (!plain_name(id)) throw InputError("registry id '" + id + "' is not a plain name");
  std::lock_guard lock(mutex_);
  const fs::path dest = root_ / id;
  if (fs::exists(dest)) throw InputError("registry already holds '" + id + "'");
  const fs::path staging = root_ / (".staging-" + id);
  fs::remove_all(staging);
  fs::create_directories(staging);
  model.save(staging / "model.bin");
  io::write_json(staging / "train_report.json", to_json(report));
  fs::rename(staging, dest);
}

Classifier Registry::load_model(const std::string& id) const {
  if (!contains(id)) throw InputError("registry has no model '" + id + "'");
  return Classifier::load(root_ / id / "model.bin");
}

TrainReport Registry::load_report(const std::string& id) const {
  if (!contains(id)) throw InputError("registry has no model '" + id + "'");
  try {
    return train_report_from_json(io::read_json(root_ / id / "train_report.json"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(id + "/train_report.json: " + e.what());
  }
}

void ZooConfig::validate() const {
  if (models_per_kind < 1) throw InputError("models_per_kind must be >= 1");
  if (num_classes < 3) throw InputError("the zoo needs at least 3 classes");
  if (train_per_class < 1 || test_per_class < 1) throw InputError("split sizes must be >= 1");
  if (!(poison_rate > 0.0 && poison_rate <= 1.0)) throw InputError("poison_rate must be in (0,1]");
}

nlohmann::json to_json(const ZooConfig& c) {
  return {
      {"models_per_kind", c.models_per_kind},
      {"num_classes", c.num_classes},
      {"shape", {c.shape.channels, c.shape.height, c.shape.width}},
      {"train_per_class", c.train_per_class},
      {"test_per_class", c.test_per_class},
      {"data_seed", c.data_seed},
      {"train", to_json(c.train)},
      {"poison_rate", c.poison_rate},
      {"seed", c.seed},
  };
}

ZooConfig zoo_config_from_json(const nlohmann::json& j) {
  ZooConfig c;
  try {
    c.models_per_kind = j.value("models_per_kind", c.models_per_kind);
    c.num_classes = j.value("num_classes", c.num_classes);
    if (j.contains("shape")) {
      const auto dims = j.at("shape").get<std::vector<int>>();
      if (dims.size() != 3) throw InputError("zoo shape needs 3 dims");
      c.shape = {dims[0], dims[1], dims[2]};
    }
    c.train_per_class = j.value("train_per_class", c.train_per_class);
    c.test_per_class = j.value("test_per_class", c.test_per_class);
    c.data_seed = j.value("data_seed", c.data_seed);
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"));
    c.poison_rate = j.value("poison_rate", c.poison_rate);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad zoo config: ") + e.what());
  }
  c.validate();
  return c;
}

DatasetSplits zoo_data(const ZooConfig& c) {
  return {synth_dataset(c.num_classes, c.train_per_class, c.shape, derive_seed(c.data_seed, "train")),
          synth_dataset(c.num_classes, c.test_per_class, c.shape, derive_seed(c.data_seed, "test"))};
}

int zoo_target(const ZooConfig& config, const std::string& family, int index) {
  const auto h = derive_seed(derive_seed(config.seed, family), "target", static_cast<std::uint64_t>(index));
  return static_cast<int>(h % static_cast<std::uint64_t>(config.num_classes));
}

std::vector<ModelSpec> zoo_members(const ZooConfig& config, const std::string& family,
                                   const std::function<TriggerSpec(int)>& make_trigger) {
  config.validate();
  nlohmann::json digest_src = to_json(config);
  digest_src.erase("models_per_kind");
  char digest[9];
  std::snprintf(digest, sizeof digest, "%08x",
                static_cast<unsigned>(fnv1a(digest_src.dump()) & 0xffffffffu));

  std::vector<ModelSpec> out;
  for (int i = 0; i < config.models_per_kind; ++i) {
    ModelSpec spec;
    spec.seed = derive_seed(derive_seed(config.seed, family), "model", static_cast<std::uint64_t>(i));
    std::string attack = "clean";
    if (make_trigger) {
      PoisonPlan plan;
      plan.poison_rate = config.poison_rate;
      plan.trigger = make_trigger(i);
      plan.trigger.validate(config.shape);
      attack = plan.trigger.attack_id();
      spec.plan = plan;
    }
    char idx[16];
    std::snprintf(idx, sizeof idx, "%02d", i);
    spec.id = family + "-" + attack + "-" + idx + "-" + digest;
    out.push_back(std::move(spec));
  }
  return out;
}

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
  const std::size_t threads = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, workers)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::string> ensure_models(Registry& registry, const ZooConfig& config,
                                       const std::vector<ModelSpec>& specs, int workers) {
  std::vector<const ModelSpec*> todo;
  for (const auto& s : specs) {
    if (!registry.contains(s.id)) todo.push_back(&s);
  }
  if (todo.empty()) return {};
  const DatasetSplits data = zoo_data(config);
  parallel_for(todo.size(), workers, [&](std::size_t i) {
    const ModelSpec& s = *todo[i];
    TrainedModel t = train_model(data.train, data.test, config.train, s.plan, s.seed);
    registry.add(s.id, t.model, t.report);
  });
  std::vector<std::string> trained;
  for (const auto* s : todo) trained.push_back(s->id);
  return trained;
}

}  // namespace a2p
