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

#include "a2p/unlearning.hpp"

#include <algorithm>
#include <cmath>

#include "a2p/rng.hpp"

namespace a2p {

std::string to_string(UnlearnMode mode) {
  switch (mode) {
    case UnlearnMode::kReversedTrigger: return "reversed_trigger";
    case UnlearnMode::kOriginalTrigger: return "original_trigger";
    case UnlearnMode::kRandomNoise: return "random_noise";
    case UnlearnMode::kNoPatching: return "no_patching";
  }
  return "?";
}

UnlearnMode parse_unlearn_mode(std::string_view name) {
  for (auto m : {UnlearnMode::kReversedTrigger, UnlearnMode::kOriginalTrigger,
                 UnlearnMode::kRandomNoise, UnlearnMode::kNoPatching}) {
    if (to_string(m) == name) return m;
  }
  throw InputError("unknown unlearning mode '" + std::string(name) + "'");
}

void UnlearnConfig::validate() const {
  if (!(subset_fraction > 0.0 && subset_fraction <= 1.0)) {
    throw InputError("subset_fraction must be in (0,1]");
  }
  if (!(patch_fraction >= 0.0 && patch_fraction <= 1.0)) {
    throw InputError("patch_fraction must be in [0,1]");
  }
  if (epochs < 0) throw InputError("epochs must be >= 0");
  if (!(lr_scale > 0.0)) throw InputError("lr_scale must be > 0");
  if (noise_magnitude && !(*noise_magnitude >= 0.0 && *noise_magnitude <= 1.0)) {
    throw InputError("noise_magnitude must be in [0,1]");
  }
}

nlohmann::json to_json(const UnlearnConfig& c) {
  return {
      {"subset_fraction", c.subset_fraction},
      {"patch_fraction", c.patch_fraction},
      {"epochs", c.epochs},
      {"lr_scale", c.lr_scale},
      {"learning_rate", c.sgd.learning_rate},
      {"momentum", c.sgd.momentum},
      {"weight_decay", c.sgd.weight_decay},
      {"batch_size", c.sgd.batch_size},
      {"noise_magnitude", c.noise_magnitude ? nlohmann::json(*c.noise_magnitude) : nlohmann::json(nullptr)},
      {"seed", c.seed},
  };
}

UnlearnConfig unlearn_config_from_json(const nlohmann::json& j) {
  UnlearnConfig c;
  try {
    c.subset_fraction = j.value("subset_fraction", c.subset_fraction);
    c.patch_fraction = j.value("patch_fraction", c.patch_fraction);
    c.epochs = j.value("epochs", c.epochs);
    c.lr_scale = j.value("lr_scale", c.lr_scale);
    c.sgd.learning_rate = j.value("learning_rate", c.sgd.learning_rate);
    c.sgd.momentum = j.value("momentum", c.sgd.momentum);
    c.sgd.weight_decay = j.value("weight_decay", c.sgd.weight_decay);
    c.sgd.batch_size = j.value("batch_size", c.sgd.batch_size);
    if (j.contains("noise_magnitude") && !j.at("noise_magnitude").is_null()) {
      c.noise_magnitude = j.at("noise_magnitude").get<double>();
    }
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad unlearning config: ") + e.what());
  }
  c.validate();
  return c;
}

namespace {

nlohmann::json eval_json(const Evaluation& e) {
  return {{"clean_accuracy", e.clean_accuracy},
          {"asr_b", e.asr_b ? nlohmann::json(*e.asr_b) : nlohmann::json(nullptr)}};
}

}  // namespace

nlohmann::json to_json(const UnlearnReport& r) {
  return {
      {"mode", to_string(r.mode)},
      {"before", eval_json(r.before)},
      {"after", eval_json(r.after)},
      {"subset_size", r.subset_size},
      {"patched_count", r.patched_indices.size()},
      {"patched_indices", r.patched_indices},
      {"config", to_json(r.config)},
  };
}

UnlearnResult unlearn(const Classifier& model, const Dataset& train, const Dataset& test,
                      const ProbeArchive* archive, const TriggerSpec* trigger, UnlearnMode mode,
                      const UnlearnConfig& config) {
  config.validate();
  if (train.size() == 0) throw InputError("unlearning needs a non-empty training set");
  if (train.data.shape != model.input_shape()) {
    throw InputError("training images do not match the model input shape");
  }
  if (mode == UnlearnMode::kReversedTrigger) {
    if (!archive) throw InputError("reversed_trigger mode needs a probe archive");
    if (archive->images.shape != train.data.shape) {
      throw InputError("probe archive shape " + to_string(archive->images.shape) +
                       " does not match training images " + to_string(train.data.shape));
    }
    if (archive->images.size() == 0) throw InputError("probe archive is empty");
  }
  if (mode == UnlearnMode::kOriginalTrigger && !trigger) {
    throw InputError("original_trigger mode needs the trigger spec");
  }
  double noise = 0.0;
  if (mode == UnlearnMode::kRandomNoise) {
    if (config.noise_magnitude) {
      noise = *config.noise_magnitude;
    } else if (archive) {
      noise = archive->budget;
    } else {
      throw InputError("random_noise mode needs noise_magnitude or a probe archive");
    }
  }

  const std::size_t n = train.size();
  const auto subset_size = static_cast<std::size_t>(std::floor(config.subset_fraction * n));
  if (subset_size == 0) throw InputError("subset_fraction selects no training samples");
  const auto patch_count = static_cast<std::size_t>(std::floor(config.patch_fraction * subset_size));

  Rng rng(derive_seed(config.seed, "unlearn-subset"));
  std::vector<std::size_t> subset = rng.sample_without_replacement(n, subset_size);
  std::sort(subset.begin(), subset.end());
  Rng prng(derive_seed(config.seed, "unlearn-patch"));
  std::vector<std::size_t> which = prng.sample_without_replacement(subset_size, patch_count);
  std::sort(which.begin(), which.end());

  Dataset tune;
  tune.name = train.name + "-unlearn";
  tune.num_classes = train.num_classes;
  tune.seed = train.seed;
  tune.data = train.data.subset(subset);

  UnlearnReport report;
  report.mode = mode;
  report.subset_size = subset_size;
  report.config = config;
  const std::size_t px = train.data.shape.size();
  Rng nrng(derive_seed(config.seed, "unlearn-noise"));
  for (std::size_t k = 0; k < which.size(); ++k) {
    const std::size_t pos = which[k];
    report.patched_indices.push_back(subset[pos]);
    auto img = tune.data.image(pos);
    switch (mode) {
      case UnlearnMode::kReversedTrigger: {
        const std::size_t a = k % archive->images.size();
        for (std::size_t j = 0; j < px; ++j) {
          img[j] = std::clamp(img[j] + archive->probes[a * px + j], 0.0, 1.0);
        }
        break;
      }
      case UnlearnMode::kOriginalTrigger: {
        const auto stamped = apply_trigger(img, train.data.shape, *trigger);
        std::copy(stamped.begin(), stamped.end(), img.begin());
        break;
      }
      case UnlearnMode::kRandomNoise:
        for (std::size_t j = 0; j < px; ++j) {
          img[j] = std::clamp(img[j] + nrng.uniform(-noise, noise), 0.0, 1.0);
        }
        break;
      case UnlearnMode::kNoPatching:
        break;
    }
  }

  report.before = evaluate(model, test.data, trigger);
  SgdConfig sgd = config.sgd;
  sgd.learning_rate *= config.lr_scale;
  Classifier tuned = fine_tune(model, tune, config.epochs, sgd, derive_seed(config.seed, "unlearn-shuffle"));
  report.after = evaluate(tuned, test.data, trigger);
  return {std::move(tuned), std::move(report)};
}

}  // namespace a2p
