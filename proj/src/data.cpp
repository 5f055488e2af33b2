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

#include "a2p/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "a2p/io.hpp"
#include "a2p/rng.hpp"

namespace a2p {

namespace {

constexpr int kShapeKinds = 10;

// Point-in-shape test in shape-local coordinates scaled so the shape's
// nominal radius is 1.
bool inside(int kind, double u, double v) {
  const double au = std::abs(u), av = std::abs(v);
  switch (kind) {
    case 0: return au <= 0.8 && av <= 0.8;                          // filled square
    case 1: return u * u + v * v <= 0.85;                           // disc
    case 2: return v <= 0.8 && v >= -0.9 && au <= (v + 0.9) * 0.55;  // triangle, apex up
    case 3: return au <= 1.0 && av <= 0.3;                          // horizontal bar
    case 4: return au <= 0.3 && av <= 1.0;                          // vertical bar
    case 5: return (au <= 0.25 && av <= 1.0) || (av <= 0.25 && au <= 1.0);  // plus
    case 6: {                                                       // ring
      const double r2 = u * u + v * v;
      return r2 <= 1.0 && r2 >= 0.4;
    }
    case 7: return au + av <= 1.0;                                  // diamond
    case 8: return std::abs(au - av) <= 0.28 && au <= 1.0;          // X
    case 9: return std::max(au, av) <= 0.95 && std::max(au, av) >= 0.6;  // hollow square
    default: return false;
  }
}

std::array<double, 3> hue_to_rgb(double hue) {
  // Fully saturated HSV with V = 1.
  const double h = std::fmod(hue, 1.0) * 6.0;
  const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
  switch (static_cast<int>(h)) {
    case 0: return {1.0, x, 0.0};
    case 1: return {x, 1.0, 0.0};
    case 2: return {0.0, 1.0, x};
    case 3: return {0.0, x, 1.0};
    case 4: return {x, 0.0, 1.0};
    default: return {1.0, 0.0, x};
  }
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

void render(std::span<double> img, ImageShape shape, int label, int num_classes, Rng& rng) {
  const int kind = label % kShapeKinds;
  const double scale = std::min(shape.height, shape.width) / 16.0;
  const double cy = (shape.height - 1) / 2.0 + rng.uniform(-1.5, 1.5) * scale;
  const double cx = (shape.width - 1) / 2.0 + rng.uniform(-1.5, 1.5) * scale;
  const double radius = rng.uniform(3.8, 5.0) * scale;

  const double hue = static_cast<double>(label) / num_classes + rng.uniform(-0.05, 0.05);
  auto rgb = hue_to_rgb(hue < 0 ? hue + 1.0 : hue);
  const double brightness = rng.uniform(0.45, 0.75);
  std::array<double, 3> bg{};
  const double bg_level = rng.uniform(0.15, 0.45);
  for (double& b : bg) b = bg_level + rng.uniform(-0.1, 0.1);

  const std::size_t hw = shape.pixels();
  for (int y = 0; y < shape.height; ++y) {
    for (int x = 0; x < shape.width; ++x) {
      const bool in = inside(kind, (x - cx) / radius, (y - cy) / radius);
      for (int c = 0; c < shape.channels; ++c) {
        const double base = in ? brightness * (0.35 + 0.65 * rgb[c % 3]) : bg[c % 3];
        const double noise = 0.1 * rng.normal();
        const double v = clamp01(base + noise);
        img[c * hw + static_cast<std::size_t>(y) * shape.width + x] =
            static_cast<double>(static_cast<float>(v));
      }
    }
  }
}

}  // namespace

Dataset synth_dataset(int num_classes, int per_class, ImageShape shape, std::uint64_t seed) {
  if (num_classes < 2) throw InputError("synth_dataset needs at least 2 classes");
  if (per_class < 1) throw InputError("synth_dataset needs per_class >= 1");
  if (shape.channels < 1 || shape.height < 4 || shape.width < 4) {
    throw InputError("synth_dataset needs images of at least 1x4x4, got " + to_string(shape));
  }
  Dataset ds;
  ds.name = "synth";
  ds.num_classes = num_classes;
  ds.seed = seed;
  const std::size_t n = static_cast<std::size_t>(num_classes) * per_class;
  ds.data = ImageBatch(shape, n);
  Rng rng(derive_seed(seed, "synth"));
  // Interleave classes so that any prefix is close to balanced.
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % num_classes);
    ds.data.labels[i] = label;
    render(ds.data.image(i), shape, label, num_classes, rng);
  }
  return ds;
}

Dataset load_cifar10_binary(const std::filesystem::path& path) {
  constexpr std::size_t kRecord = 3073;
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path)) {
      const auto name = entry.path().filename().string();
      if (entry.path().extension() == ".bin" &&
          (name.starts_with("data_batch") || name.starts_with("test_batch"))) {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError(path.string() + ": no CIFAR-10 batch files found");
  } else {
    files.push_back(path);
  }

  Dataset ds;
  ds.name = "cifar10";
  ds.num_classes = 10;
  ds.data.shape = {3, 32, 32};
  for (const auto& file : files) {
    const std::string bytes = io::read_file(file);
    if (bytes.empty() || bytes.size() % kRecord != 0) {
      throw FormatError(file.string() + ": length " + std::to_string(bytes.size()) +
                        " is not a multiple of the 3073-byte record size");
    }
    const std::size_t records = bytes.size() / kRecord;
    for (std::size_t r = 0; r < records; ++r) {
      const auto* rec = reinterpret_cast<const unsigned char*>(bytes.data() + r * kRecord);
      if (rec[0] > 9) {
        throw FormatError(file.string() + ": record " + std::to_string(r) + " has label " +
                          std::to_string(rec[0]));
      }
      ds.data.labels.push_back(rec[0]);
      for (std::size_t j = 1; j < kRecord; ++j) ds.data.pixels.push_back(rec[j] / 255.0);
    }
  }
  return ds;
}

namespace {

void save_split(const std::filesystem::path& dir, const std::string& split, const Dataset& ds) {
  std::vector<float> f(ds.data.pixels.begin(), ds.data.pixels.end());
  std::string pixels;
  io::append_f32(pixels, f);
  io::write_file_atomic(dir / (split + ".pixels.f32"), pixels);
  std::string labels;
  io::append_i32(labels, ds.data.labels);
  io::write_file_atomic(dir / (split + ".labels.i32"), labels);
}

Dataset load_split(const std::filesystem::path& dir, const std::string& split,
                   const io::json& manifest) {
  Dataset ds;
  try {
    ds.name = manifest.at("name").get<std::string>();
    ds.num_classes = manifest.at("num_classes").get<int>();
    ds.seed = manifest.at("seed").get<std::uint64_t>();
    const auto dims = manifest.at("shape").get<std::vector<int>>();
    if (dims.size() != 3) throw FormatError("manifest field 'shape' needs 3 dims");
    ds.data.shape = {dims[0], dims[1], dims[2]};
    const auto n = manifest.at("splits").at(split).get<std::size_t>();
    const std::string pix = io::read_file(dir / (split + ".pixels.f32"));
    io::Reader pr(pix);
    auto f = pr.f32(n * ds.data.shape.size(), split + ".pixels");
    if (pr.remaining() != 0) throw FormatError("field '" + split + ".pixels' has trailing bytes");
    ds.data.pixels.assign(f.begin(), f.end());
    const std::string lab = io::read_file(dir / (split + ".labels.i32"));
    io::Reader lr(lab);
    ds.data.labels = lr.i32(n, split + ".labels");
    if (lr.remaining() != 0) throw FormatError("field '" + split + ".labels' has trailing bytes");
  } catch (const io::json::exception& e) {
    throw FormatError(dir.string() + ": malformed manifest: " + e.what());
  }
  try {
    ds.data.validate(ds.num_classes);
  } catch (const InputError& e) {
    throw FormatError(dir.string() + ": split '" + split + "': " + e.what());
  }
  return ds;
}

}  // namespace

void save_dataset(const std::filesystem::path& dir, const DatasetSplits& splits) {
  if (splits.train.data.shape != splits.test.data.shape ||
      splits.train.num_classes != splits.test.num_classes) {
    throw InputError("train and test splits disagree on shape or class count");
  }
  std::filesystem::create_directories(dir);
  const ImageShape s = splits.train.data.shape;
  io::json manifest = {
      {"name", splits.train.name},
      {"num_classes", splits.train.num_classes},
      {"shape", {s.channels, s.height, s.width}},
      {"seed", splits.train.seed},
      {"splits", {{"train", splits.train.size()}, {"test", splits.test.size()}}},
  };
  save_split(dir, "train", splits.train);
  save_split(dir, "test", splits.test);
  io::write_json(dir / "manifest.json", manifest);
}

DatasetSplits load_dataset(const std::filesystem::path& dir) {
  const io::json manifest = io::read_json(dir / "manifest.json");
  return {load_split(dir, "train", manifest), load_split(dir, "test", manifest)};
}

ImageBatch sample_per_class(const Dataset& dataset, int per_class, std::uint64_t seed) {
  if (per_class < 1) throw InputError("samples per class must be >= 1");
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(dataset.num_classes));
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    by_class[static_cast<std::size_t>(dataset.data.labels[i])].push_back(i);
  }
  std::vector<std::size_t> chosen;
  for (int c = 0; c < dataset.num_classes; ++c) {
    const auto& pool = by_class[static_cast<std::size_t>(c)];
    if (pool.size() < static_cast<std::size_t>(per_class)) {
      throw InputError("class " + std::to_string(c) + " has only " + std::to_string(pool.size()) +
                       " samples, need " + std::to_string(per_class));
    }
    Rng rng(derive_seed(seed, "per_class", static_cast<std::uint64_t>(c)));
    auto pick = rng.sample_without_replacement(pool.size(), static_cast<std::size_t>(per_class));
    std::sort(pick.begin(), pick.end());
    for (std::size_t j : pick) chosen.push_back(pool[j]);
  }
  return dataset.data.subset(chosen);
}

std::vector<std::size_t> indices_without_label(const ImageBatch& batch, int label) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (batch.labels[i] != label) out.push_back(i);
  }
  return out;
}

}  // namespace a2p
