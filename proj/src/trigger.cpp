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

#include "a2p/trigger.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "a2p/rng.hpp"

namespace a2p {

std::string to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::kPatch: return "patch";
    case TriggerKind::kBlend: return "blend";
    case TriggerKind::kWarp: return "warp";
    case TriggerKind::kPerSamplePatch: return "per_sample_patch";
    case TriggerKind::kMultiPatch: return "multi_patch";
  }
  return "unknown";
}

TriggerKind parse_trigger_kind(std::string_view name) {
  if (name == "patch") return TriggerKind::kPatch;
  if (name == "blend") return TriggerKind::kBlend;
  if (name == "warp") return TriggerKind::kWarp;
  if (name == "per_sample_patch") return TriggerKind::kPerSamplePatch;
  if (name == "multi_patch") return TriggerKind::kMultiPatch;
  throw InputError("unknown trigger kind '" + std::string(name) + "'");
}

std::string to_string(Location loc) {
  switch (loc) {
    case Location::kTopLeft: return "TL";
    case Location::kTopRight: return "TR";
    case Location::kBottomRight: return "BR";
    case Location::kBottomLeft: return "BL";
    case Location::kCenter: return "C";
  }
  return "?";
}

Location parse_location(std::string_view name) {
  if (name == "TL") return Location::kTopLeft;
  if (name == "TR") return Location::kTopRight;
  if (name == "BR") return Location::kBottomRight;
  if (name == "BL") return Location::kBottomLeft;
  if (name == "C") return Location::kCenter;
  throw InputError("unknown location '" + std::string(name) + "'");
}

namespace {

constexpr int kSmallPatch = 3;

std::pair<int, int> origin(Location loc, int side, ImageShape shape) {
  switch (loc) {
    case Location::kTopLeft: return {0, 0};
    case Location::kTopRight: return {0, shape.width - side};
    case Location::kBottomRight: return {shape.height - side, shape.width - side};
    case Location::kBottomLeft: return {shape.height - side, 0};
    case Location::kCenter: return {(shape.height - side) / 2, (shape.width - side) / 2};
  }
  return {0, 0};
}

void stamp(std::span<double> img, ImageShape shape, int row, int col, int side,
           std::span<const double> patch) {
  const std::size_t hw = shape.pixels();
  for (int c = 0; c < shape.channels; ++c) {
    for (int y = 0; y < side; ++y) {
      for (int x = 0; x < side; ++x) {
        img[c * hw + static_cast<std::size_t>(row + y) * shape.width + (col + x)] =
            patch[(static_cast<std::size_t>(c) * side + y) * side + x];
      }
    }
  }
}

double bilinear(std::span<const double> plane, ImageShape shape, double y, double x) {
  y = std::clamp(y, 0.0, static_cast<double>(shape.height - 1));
  x = std::clamp(x, 0.0, static_cast<double>(shape.width - 1));
  const int y0 = static_cast<int>(std::floor(y)), x0 = static_cast<int>(std::floor(x));
  const int y1 = std::min(y0 + 1, shape.height - 1), x1 = std::min(x0 + 1, shape.width - 1);
  const double fy = y - y0, fx = x - x0;
  auto at = [&](int yy, int xx) { return plane[static_cast<std::size_t>(yy) * shape.width + xx]; };
  return (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
         fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
}

std::uint64_t hash_image(std::span<const double> image) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(image.data());
  for (std::size_t i = 0; i < image.size_bytes(); ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

void TriggerSpec::validate(ImageShape shape) const {
  if (target_label < 0) throw InputError("trigger target label must be non-negative");
  switch (kind) {
    case TriggerKind::kPatch:
      if (side < 1) throw InputError("patch side must be >= 1");
      if (side > shape.height || side > shape.width) {
        throw InputError("patch of side " + std::to_string(side) + " does not fit image " +
                         to_string(shape));
      }
      if (!pattern.empty() && pattern.size() != static_cast<std::size_t>(shape.channels) * side * side) {
        throw InputError("patch pattern must hold C*side*side values");
      }
      break;
    case TriggerKind::kBlend:
      if (!(blend >= 0.0 && blend <= 1.0)) throw InputError("blend weight must lie in [0,1]");
      if (!pattern.empty() && pattern.size() != shape.size()) {
        throw InputError("blend pattern must have the image's shape");
      }
      break;
    case TriggerKind::kWarp:
      if (!(warp_strength >= 0.0)) throw InputError("warp strength must be non-negative");
      break;
    case TriggerKind::kPerSamplePatch:
      if (shape.height < kSmallPatch || shape.width < kSmallPatch) {
        throw InputError("image too small for a 3x3 per-sample patch");
      }
      break;
    case TriggerKind::kMultiPatch:
      if (locations.empty() || locations.size() > 5) {
        throw InputError("multi_patch needs between 1 and 5 patches");
      }
      if (shape.height < kSmallPatch || shape.width < kSmallPatch) {
        throw InputError("image too small for 3x3 patches");
      }
      break;
  }
  for (double v : pattern) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("trigger pattern values must lie in [0,1]");
  }
}

std::string TriggerSpec::attack_id() const {
  switch (kind) {
    case TriggerKind::kPatch:
      return "patch-" + std::to_string(side) + "-" + to_string(location);
    case TriggerKind::kBlend: {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "blend-%.3f", blend);
      return buf;
    }
    case TriggerKind::kWarp: return "warp";
    case TriggerKind::kPerSamplePatch: return "per_sample_patch";
    case TriggerKind::kMultiPatch: return "multi_patch-" + std::to_string(locations.size());
  }
  return "unknown";
}

nlohmann::json to_json(const TriggerSpec& spec) {
  nlohmann::json j = {
      {"kind", to_string(spec.kind)},
      {"target_label", spec.target_label},
      {"pattern_seed", spec.pattern_seed},
  };
  switch (spec.kind) {
    case TriggerKind::kPatch:
      j["location"] = to_string(spec.location);
      j["side"] = spec.side;
      break;
    case TriggerKind::kBlend: j["blend"] = spec.blend; break;
    case TriggerKind::kWarp: j["warp_strength"] = spec.warp_strength; break;
    case TriggerKind::kPerSamplePatch: break;
    case TriggerKind::kMultiPatch: {
      auto& locs = j["locations"] = nlohmann::json::array();
      for (Location l : spec.locations) locs.push_back(to_string(l));
      break;
    }
  }
  if (!spec.pattern.empty()) j["pattern"] = spec.pattern;
  return j;
}

TriggerSpec trigger_from_json(const nlohmann::json& j) {
  TriggerSpec s;
  s.kind = parse_trigger_kind(j.at("kind").get<std::string>());
  s.target_label = j.at("target_label").get<int>();
  s.pattern_seed = j.value("pattern_seed", std::uint64_t{0});
  if (j.contains("location")) s.location = parse_location(j.at("location").get<std::string>());
  s.side = j.value("side", 4);
  s.blend = j.value("blend", 0.2);
  s.warp_strength = j.value("warp_strength", 1.5);
  if (j.contains("locations")) {
    for (const auto& l : j.at("locations")) s.locations.push_back(parse_location(l.get<std::string>()));
  }
  if (j.contains("pattern")) s.pattern = j.at("pattern").get<std::vector<double>>();
  return s;
}

TriggerSpec blend_trigger(double value, BlendConvention convention, int target_label,
                          std::uint64_t pattern_seed) {
  TriggerSpec s;
  s.kind = TriggerKind::kBlend;
  s.target_label = target_label;
  s.blend = convention == BlendConvention::kMixingWeight ? value : 1.0 - value;
  s.pattern_seed = pattern_seed;
  return s;
}

std::vector<double> trigger_pattern(const TriggerSpec& spec, ImageShape shape) {
  if (!spec.pattern.empty()) return spec.pattern;
  Rng rng(derive_seed(spec.pattern_seed, "trigger_pattern"));
  switch (spec.kind) {
    case TriggerKind::kPatch:
      return std::vector<double>(static_cast<std::size_t>(shape.channels) * spec.side * spec.side,
                                 1.0);
    case TriggerKind::kBlend: {
      // Gaussian noise image.
      std::vector<double> mu(shape.size());
      for (double& v : mu) {
        v = static_cast<double>(static_cast<float>(std::clamp(0.5 + 0.25 * rng.normal(), 0.0, 1.0)));
      }
      return mu;
    }
    case TriggerKind::kMultiPatch: {
      std::vector<double> mu(spec.locations.size() * shape.channels * kSmallPatch * kSmallPatch);
      for (double& v : mu) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
      return mu;
    }
    case TriggerKind::kWarp:
    case TriggerKind::kPerSamplePatch:
      return {};
  }
  return {};
}

std::pair<int, int> per_sample_patch_origin(std::span<const double> image, ImageShape shape) {
  const std::uint64_t h = hash_image(image);
  const int row = static_cast<int>(h % static_cast<std::uint64_t>(shape.height - kSmallPatch + 1));
  const int col =
      static_cast<int>((h >> 32) % static_cast<std::uint64_t>(shape.width - kSmallPatch + 1));
  return {row, col};
}

namespace {

// Applies with a pre-materialised pattern so batch application does not
// regenerate it per image.
std::vector<double> apply_with_pattern(std::span<const double> image, ImageShape shape,
                                       const TriggerSpec& spec, std::span<const double> mu) {
  std::vector<double> out(image.begin(), image.end());
  const std::size_t hw = shape.pixels();
  switch (spec.kind) {
    case TriggerKind::kPatch: {
      auto [row, col] = origin(spec.location, spec.side, shape);
      stamp(out, shape, row, col, spec.side, mu);
      break;
    }
    case TriggerKind::kBlend:
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = std::clamp((1.0 - spec.blend) * image[i] + spec.blend * mu[i], 0.0, 1.0);
      }
      break;
    case TriggerKind::kWarp: {
      Rng rng(derive_seed(spec.pattern_seed, "warp_field"));
      const double p1 = rng.uniform(0, 2 * M_PI), p2 = rng.uniform(0, 2 * M_PI);
      const double p3 = rng.uniform(0, 2 * M_PI), p4 = rng.uniform(0, 2 * M_PI);
      for (int c = 0; c < shape.channels; ++c) {
        std::span<const double> plane = image.subspan(c * hw, hw);
        for (int y = 0; y < shape.height; ++y) {
          for (int x = 0; x < shape.width; ++x) {
            const double ay = 2 * M_PI * y / shape.height, ax = 2 * M_PI * x / shape.width;
            const double dx = spec.warp_strength * std::sin(ay + p1) * std::cos(ax + p2);
            const double dy = spec.warp_strength * std::cos(ay + p3) * std::sin(ax + p4);
            out[c * hw + static_cast<std::size_t>(y) * shape.width + x] =
                std::clamp(bilinear(plane, shape, y + dy, x + dx), 0.0, 1.0);
          }
        }
      }
      break;
    }
    case TriggerKind::kPerSamplePatch: {
      auto [row, col] = per_sample_patch_origin(image, shape);
      std::vector<double> checker(static_cast<std::size_t>(shape.channels) * 9);
      for (int c = 0; c < shape.channels; ++c) {
        for (int k = 0; k < 9; ++k) checker[c * 9 + k] = ((k / 3 + k % 3) % 2 == 0) ? 1.0 : 0.0;
      }
      stamp(out, shape, row, col, kSmallPatch, checker);
      break;
    }
    case TriggerKind::kMultiPatch: {
      const std::size_t per = static_cast<std::size_t>(shape.channels) * 9;
      for (std::size_t k = 0; k < spec.locations.size(); ++k) {
        auto [row, col] = origin(spec.locations[k], kSmallPatch, shape);
        stamp(out, shape, row, col, kSmallPatch, mu.subspan(k * per, per));
      }
      break;
    }
  }
  return out;
}

}  // namespace

std::vector<double> apply_trigger(std::span<const double> image, ImageShape shape,
                                  const TriggerSpec& spec) {
  if (image.size() != shape.size()) throw InputError("image size does not match its shape");
  spec.validate(shape);
  const auto mu = trigger_pattern(spec, shape);
  return apply_with_pattern(image, shape, spec, mu);
}

ImageBatch apply_trigger(const ImageBatch& batch, const TriggerSpec& spec) {
  spec.validate(batch.shape);
  const auto mu = trigger_pattern(spec, batch.shape);
  ImageBatch out = batch;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    auto img = apply_with_pattern(batch.image(i), batch.shape, spec, mu);
    std::copy(img.begin(), img.end(), out.image(i).begin());
  }
  return out;
}

PoisonResult poison_dataset(const Dataset& dataset, const PoisonPlan& plan, std::uint64_t seed) {
  if (dataset.size() == 0) throw InputError("cannot poison an empty dataset");
  if (!(plan.poison_rate > 0.0 && plan.poison_rate <= 1.0)) {
    throw InputError("poison rate must lie in (0,1]");
  }
  if (plan.target_label() >= dataset.num_classes) {
    throw InputError("target label outside the dataset's class range");
  }
  const auto count = static_cast<std::size_t>(
      std::floor(plan.poison_rate * static_cast<double>(dataset.size())));
  if (count < 1) throw InputError("poison rate selects fewer than one sample");
  plan.trigger.validate(dataset.data.shape);

  Rng rng(derive_seed(seed, "poison"));
  auto idx = rng.sample_without_replacement(dataset.size(), count);
  std::sort(idx.begin(), idx.end());

  PoisonResult result{dataset, idx};
  const auto mu = trigger_pattern(plan.trigger, dataset.data.shape);
  for (std::size_t i : idx) {
    auto img = apply_with_pattern(dataset.data.image(i), dataset.data.shape, plan.trigger, mu);
    std::copy(img.begin(), img.end(), result.dataset.data.image(i).begin());
    result.dataset.data.labels[i] = plan.target_label();
  }
  result.dataset.name = dataset.name + "+" + plan.trigger.attack_id();
  return result;
}

}  // namespace a2p
