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
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2p/common.hpp"

namespace a2p {

enum class TriggerKind { kPatch, kBlend, kWarp, kPerSamplePatch, kMultiPatch };
enum class Location { kTopLeft, kTopRight, kBottomRight, kBottomLeft, kCenter };

std::string to_string(TriggerKind kind);
TriggerKind parse_trigger_kind(std::string_view name);
std::string to_string(Location loc);
Location parse_location(std::string_view name);

/// How a user-facing blend value maps to the mixing weight sigma in
/// x' = (1 - sigma) x + sigma mu. kTransparency means sigma = 1 - value.
enum class BlendConvention { kMixingWeight, kTransparency };

/// Trigger T = (pattern, embedding) plus the label the attack forces.
///
/// The pattern is either given explicitly (`pattern`, image-shaped for blend,
/// C x side x side for patch) or generated from `pattern_seed`.
struct TriggerSpec {
  TriggerKind kind = TriggerKind::kPatch;
  int target_label = 0;

  // kPatch
  Location location = Location::kBottomRight;
  int side = 4;
  // kBlend: mixing weight sigma in [0,1]
  double blend = 0.2;
  // kWarp: peak displacement in pixels
  double warp_strength = 1.5;
  // kMultiPatch: 3x3 patches, 1 to 5 of them
  std::vector<Location> locations;

  std::uint64_t pattern_seed = 0;
  std::vector<double> pattern;

  /// Throws InputError unless the spec is consistent with `shape`.
  void validate(ImageShape shape) const;
  std::string attack_id() const;
};

nlohmann::json to_json(const TriggerSpec& spec);
TriggerSpec trigger_from_json(const nlohmann::json& j);

/// Blend trigger built from a user value under the chosen convention.
TriggerSpec blend_trigger(double value, BlendConvention convention, int target_label,
                          std::uint64_t pattern_seed);

/// The materialised pattern mu: patch -> C*side*side, blend -> full image,
/// multi-patch -> C*9 per location (concatenated). Empty for warp and
/// per-sample kinds.
std::vector<double> trigger_pattern(const TriggerSpec& spec, ImageShape shape);

/// Stamps the trigger on one image. Output stays in [0,1].
std::vector<double> apply_trigger(std::span<const double> image, ImageShape shape,
                                  const TriggerSpec& spec);
/// Applies the trigger to every image; labels are left untouched.
ImageBatch apply_trigger(const ImageBatch& batch, const TriggerSpec& spec);

/// Pixel (row, col) where the per-sample patch lands for this image.
std::pair<int, int> per_sample_patch_origin(std::span<const double> image, ImageShape shape);

enum class LabelMode { kDirty };

struct PoisonPlan {
  double poison_rate = 0.10;
  TriggerSpec trigger;
  LabelMode label_mode = LabelMode::kDirty;

  int target_label() const { return trigger.target_label; }
};

struct PoisonResult {
  Dataset dataset;
  std::vector<std::size_t> poisoned_indices;  // ascending
};

/// floor(rate * n) seeded-uniform samples get the trigger and label y_t.
PoisonResult poison_dataset(const Dataset& dataset, const PoisonPlan& plan, std::uint64_t seed);

}  // namespace a2p
