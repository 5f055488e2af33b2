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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "a2p/common.hpp"

namespace a2p {

/// Reference architectures. kLinear is a single affine layer (softmax
/// regression) used where a closed-form gradient is needed.
enum class Architecture { kSmallCnn, kMlp, kLinear };

std::string to_string(Architecture arch);
Architecture parse_architecture(std::string_view name);

/// Training provenance carried inside every model file.
struct ModelMetadata {
  std::uint64_t seed = 0;
  std::string dataset_id;
  std::string attack_id = "clean";
  std::optional<int> target_label;

  bool operator==(const ModelMetadata&) const = default;
};

/// Named float32 weight array.
struct Tensor {
  std::string name;
  std::vector<int> dims;
  std::vector<float> values;
};

struct SgdConfig {
  double learning_rate = 0.05;
  double momentum = 0.9;
  double weight_decay = 0.0;
  int batch_size = 32;
};

namespace detail {

enum class LayerKind { kConv3x3, kRelu, kMaxPool2, kDense };

struct Layer {
  LayerKind kind;
  std::string name;
  int in_c, in_h, in_w;
  int out_c, out_h, out_w;
  int weight = -1;
  int bias = -1;

  std::size_t in_size() const { return static_cast<std::size_t>(in_c) * in_h * in_w; }
  std::size_t out_size() const { return static_cast<std::size_t>(out_c) * out_h * out_w; }
};

}  // namespace detail

/// A small differentiable image classifier. Weights are stored as float32 so
/// that a saved model reproduces forward outputs bit-for-bit; activations are
/// computed in double precision.
///
/// Const member functions never mutate the handle and may be called from
/// several threads at once.
class Classifier {
 public:
  /// He-uniform initialised weights drawn from `seed`.
  Classifier(Architecture arch, ImageShape input_shape, int num_classes, std::uint64_t seed);
  /// Explicit weights. Every tensor the architecture needs must be present
  /// with the right dims.
  Classifier(Architecture arch, ImageShape input_shape, int num_classes,
             std::vector<Tensor> parameters);

  Architecture architecture() const { return arch_; }
  ImageShape input_shape() const { return shape_; }
  int num_classes() const { return num_classes_; }

  const ModelMetadata& metadata() const { return metadata_; }
  void set_metadata(ModelMetadata metadata);

  std::span<const Tensor> parameters() const { return params_; }
  std::span<Tensor> mutable_parameters() { return params_; }
  const Tensor& parameter(std::string_view name) const;

  /// Softmax probabilities, N x K.
  Matrix forward(const ImageBatch& batch) const;
  std::vector<int> predict(const ImageBatch& batch) const;
  /// d(cross-entropy)/d(pixels) per image, against batch.labels.
  GradientBatch input_gradient(const ImageBatch& batch) const;
  /// Mean cross-entropy against batch.labels.
  double mean_loss(const ImageBatch& batch) const;

  /// Adds the summed parameter gradients of the selected samples into
  /// `grads` (one vector per parameter tensor) and returns the summed loss.
  double accumulate_parameter_gradients(const ImageBatch& batch,
                                        std::span<const std::size_t> indices,
                                        std::vector<std::vector<double>>& grads) const;

  void save(const std::filesystem::path& path) const;
  static Classifier load(const std::filesystem::path& path);

 private:
  void build_layers();
  void check_batch(const ImageBatch& batch) const;

  Architecture arch_;
  ImageShape shape_;
  int num_classes_;
  ModelMetadata metadata_;
  std::vector<Tensor> params_;
  std::vector<detail::Layer> layers_;
};

/// Plain SGD with momentum. Returns a new handle; `model` is untouched.
/// epochs == 0 returns an exact copy.
Classifier fine_tune(const Classifier& model, const Dataset& dataset, int epochs,
                     const SgdConfig& config, std::uint64_t seed);

}  // namespace a2p
