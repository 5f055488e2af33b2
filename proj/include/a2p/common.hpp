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

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace a2p {

/// Caller passed arguments that violate an operation's preconditions.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file on disk could not be parsed. The message names the offending field.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training diverged (non-finite loss or parameters).
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ImageShape {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t pixels() const { return static_cast<std::size_t>(height) * width; }
  std::size_t size() const { return static_cast<std::size_t>(channels) * pixels(); }
  bool operator==(const ImageShape&) const = default;
};

std::string to_string(const ImageShape& shape);

/// N images in NCHW order with one class label per image. Pixels live in [0,1].
struct ImageBatch {
  ImageShape shape;
  std::vector<double> pixels;
  std::vector<int> labels;

  ImageBatch() = default;
  ImageBatch(ImageShape s, std::size_t n) : shape(s), pixels(n * s.size(), 0.0), labels(n, 0) {}

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }

  std::span<double> image(std::size_t i) {
    return {pixels.data() + i * shape.size(), shape.size()};
  }
  std::span<const double> image(std::size_t i) const {
    return {pixels.data() + i * shape.size(), shape.size()};
  }

  /// Throws InputError if pixels leave [0,1], sizes disagree, or a label is
  /// outside [0, num_classes).
  void validate(int num_classes) const;

  ImageBatch subset(std::span<const std::size_t> indices) const;
  void append(std::span<const double> image_pixels, int label);
};

/// Same layout as ImageBatch pixels; holds dL/dx.
struct GradientBatch {
  ImageShape shape;
  std::vector<double> values;

  std::size_t size() const { return shape.size() == 0 ? 0 : values.size() / shape.size(); }
  std::span<const double> image(std::size_t i) const {
    return {values.data() + i * shape.size(), shape.size()};
  }
};

/// Row-major dense matrix, used for N x K class probabilities.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
};

std::size_t argmax(std::span<const double> values);

/// Labelled images plus the class count they were drawn from.
struct Dataset {
  std::string name;
  int num_classes = 0;
  std::uint64_t seed = 0;
  ImageBatch data;

  std::size_t size() const { return data.size(); }
};

}  // namespace a2p
