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

#include "a2p/common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "a2p/rng.hpp"

namespace a2p {

std::string to_string(const ImageShape& shape) {
  return std::to_string(shape.channels) + "x" + std::to_string(shape.height) + "x" +
         std::to_string(shape.width);
}

void ImageBatch::validate(int num_classes) const {
  if (shape.size() == 0) throw InputError("image batch has an empty image shape");
  if (pixels.size() != labels.size() * shape.size()) {
    throw InputError("image batch pixel count " + std::to_string(pixels.size()) +
                     " does not match " + std::to_string(labels.size()) + " images of shape " +
                     to_string(shape));
  }
  for (double v : pixels) {
    if (!(v >= 0.0 && v <= 1.0)) throw InputError("pixel value outside [0,1]");
  }
  for (int y : labels) {
    if (y < 0 || y >= num_classes) {
      throw InputError("label " + std::to_string(y) + " outside [0," +
                       std::to_string(num_classes) + ")");
    }
  }
}

ImageBatch ImageBatch::subset(std::span<const std::size_t> indices) const {
  ImageBatch out(shape, indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    auto src = image(indices[k]);
    std::copy(src.begin(), src.end(), out.image(k).begin());
    out.labels[k] = labels[indices[k]];
  }
  return out;
}

void ImageBatch::append(std::span<const double> image_pixels, int label) {
  if (image_pixels.size() != shape.size()) throw InputError("appended image has wrong size");
  pixels.insert(pixels.end(), image_pixels.begin(), image_pixels.end());
  labels.push_back(label);
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag) {
  return splitmix64(splitmix64(root) ^ fnv1a(tag));
}

std::uint64_t derive_seed(std::uint64_t root, std::string_view tag, std::uint64_t index) {
  return splitmix64(derive_seed(root, tag) + index);
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

double Rng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<std::size_t> Rng::sample_without_replacement(std::size_t n, std::size_t k) {
  if (k > n) throw InputError("cannot sample more items than available");
  std::vector<std::size_t> pool(n);
  std::iota(pool.begin(), pool.end(), 0);
  for (std::size_t i = 0; i < k; ++i) {
    std::swap(pool[i], pool[i + below(n - i)]);
  }
  pool.resize(k);
  return pool;
}

}  // namespace a2p
