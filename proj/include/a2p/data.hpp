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
#include <span>
#include <string>
#include <vector>

#include "a2p/common.hpp"

namespace a2p {

/// Desk-scale stand-in for CIFAR-10/GTSRB: one geometric shape per image,
/// geometry and base hue chosen by class, with seeded position, size, colour
/// and background noise. Pixel values are float32-representable.
Dataset synth_dataset(int num_classes, int per_class, ImageShape shape, std::uint64_t seed);

/// Reads one CIFAR-10 binary batch file (3073-byte records), or every
/// `*.bin` file whose name starts with "data_batch" or "test_batch" when
/// given a directory.
Dataset load_cifar10_binary(const std::filesystem::path& path);

struct DatasetSplits {
  Dataset train;
  Dataset test;
};

/// Directory layout: manifest.json plus `<split>.pixels.f32` and
/// `<split>.labels.i32` raw little-endian arrays.
void save_dataset(const std::filesystem::path& dir, const DatasetSplits& splits);
DatasetSplits load_dataset(const std::filesystem::path& dir);

/// Seeded choice of `per_class` images from every class, grouped by class.
ImageBatch sample_per_class(const Dataset& dataset, int per_class, std::uint64_t seed);

/// Images whose label differs from `label`.
std::vector<std::size_t> indices_without_label(const ImageBatch& batch, int label);

}  // namespace a2p
