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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <gtest/gtest.h>

#include "a2p/data.hpp"
#include "a2p/io.hpp"
#include "a2p/model.hpp"
#include "a2p/rng.hpp"

namespace fs = std::filesystem;
using namespace a2p;

namespace {

ImageBatch random_batch(ImageShape shape, std::size_t n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  ImageBatch b(shape, n);
  for (double& v : b.pixels) v = rng.uniform(0.05, 0.95);
  for (int& y : b.labels) y = static_cast<int>(rng.below(static_cast<std::uint64_t>(classes)));
  return b;
}

std::vector<double> softmax(std::vector<double> z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0;
  for (double& v : z) s += (v = std::exp(v - m));
  for (double& v : z) v /= s;
  return z;
}

Classifier hand_linear() {
  // Two-pixel single-channel input, two classes.
  Tensor w{"fc.weight", {2, 2}, {1.0f, 0.0f, 0.0f, 1.0f}};
  Tensor b{"fc.bias", {2}, {0.5f, -0.5f}};
  return Classifier(Architecture::kLinear, {1, 1, 2}, 2, {w, b});
}

}  // namespace

TEST(Model, LinearForwardMatchesHandComputation) {
  const Classifier m = hand_linear();
  ImageBatch b({1, 1, 2}, 1);
  b.pixels = {0.2, 0.7};
  const Matrix p = m.forward(b);
  const auto want = softmax({0.2 + 0.5, 0.7 - 0.5});
  EXPECT_NEAR(p(0, 0), want[0], 1e-12);
  EXPECT_NEAR(p(0, 1), want[1], 1e-12);
  EXPECT_EQ(m.predict(b)[0], 0);
}

TEST(Model, LinearGradientMatchesClosedForm) {
  const Classifier m = hand_linear();
  ImageBatch b({1, 1, 2}, 1);
  b.pixels = {0.3, 0.9};
  b.labels = {1};
  const auto p = softmax({0.3 + 0.5, 0.9 - 0.5});
  // dL/dx = W^T (p - onehot) with W = I.
  const GradientBatch g = m.input_gradient(b);
  EXPECT_NEAR(g.values[0], p[0], 1e-12);
  EXPECT_NEAR(g.values[1], p[1] - 1.0, 1e-12);
}

class GradientFidelity : public ::testing::TestWithParam<Architecture> {};

TEST_P(GradientFidelity, MatchesCentralDifferences) {
  const ImageShape shape{3, 8, 8};
  const Classifier m(GetParam(), shape, 5, 17);
  ImageBatch b = random_batch(shape, 1, 5, 23);
  const GradientBatch g = m.input_gradient(b);
  Rng rng(99);
  const double h = 1e-4;
  int checked = 0;
  for (int t = 0; t < 20; ++t) {
    const std::size_t j = rng.below(shape.size());
    ImageBatch plus = b, minus = b;
    plus.pixels[j] += h;
    minus.pixels[j] -= h;
    const double fd = (m.mean_loss(plus) - m.mean_loss(minus)) / (2 * h);
    const double an = g.values[j];
    const double scale = std::max({std::abs(fd), std::abs(an), 1e-6});
    EXPECT_LE(std::abs(fd - an) / scale, 1e-2) << "coordinate " << j;
    ++checked;
  }
  EXPECT_EQ(checked, 20);
}

INSTANTIATE_TEST_SUITE_P(Architectures, GradientFidelity,
                         ::testing::Values(Architecture::kSmallCnn, Architecture::kMlp,
                                           Architecture::kLinear));

TEST(Model, SaveLoadReproducesForwardExactly) {
  const fs::path dir = fs::temp_directory_path() / "a2p_test_model";
  fs::create_directories(dir);
  Classifier m(Architecture::kSmallCnn, {3, 16, 16}, 10, 4);
  m.set_metadata({4, "synth", "patch-4-BR", 3});
  m.save(dir / "m.bin");
  const Classifier back = Classifier::load(dir / "m.bin");
  EXPECT_EQ(back.metadata(), m.metadata());
  const ImageBatch b = random_batch({3, 16, 16}, 3, 10, 8);
  EXPECT_EQ(back.forward(b).data, m.forward(b).data);
  fs::remove_all(dir);
}

TEST(Model, LoadRejectsCorruptFiles) {
  const fs::path dir = fs::temp_directory_path() / "a2p_test_model_bad";
  fs::create_directories(dir);
  io::write_file_atomic(dir / "junk.bin", "definitely not a model");
  EXPECT_THROW(Classifier::load(dir / "junk.bin"), FormatError);

  Classifier m(Architecture::kMlp, {1, 4, 4}, 3, 1);
  m.save(dir / "ok.bin");
  std::string bytes = io::read_file(dir / "ok.bin");
  io::write_file_atomic(dir / "short.bin", bytes.substr(0, bytes.size() - 5));
  EXPECT_THROW(Classifier::load(dir / "short.bin"), FormatError);
  io::write_file_atomic(dir / "long.bin", bytes + "xx");
  EXPECT_THROW(Classifier::load(dir / "long.bin"), FormatError);
  fs::remove_all(dir);
}

TEST(Model, RejectsBadInputs) {
  EXPECT_THROW(Classifier(Architecture::kSmallCnn, {3, 10, 10}, 10, 0), InputError);
  EXPECT_THROW(Classifier(Architecture::kLinear, {1, 2, 2}, 1, 0), InputError);
  const Classifier m(Architecture::kLinear, {1, 2, 2}, 3, 0);
  EXPECT_THROW(m.forward(ImageBatch({1, 3, 3}, 1)), InputError);
  EXPECT_THROW(parse_architecture("resnet"), InputError);
  Classifier c = m;
  EXPECT_THROW(c.set_metadata({0, "d", "clean", 1}), InputError);
}

TEST(Model, ZeroEpochFineTuneIsAnExactCopy) {
  const Classifier m(Architecture::kMlp, {1, 4, 4}, 3, 2);
  Dataset d{"x", 3, 0, random_batch({1, 4, 4}, 12, 3, 1)};
  const Classifier t = fine_tune(m, d, 0, SgdConfig{}, 5);
  ASSERT_EQ(t.parameters().size(), m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    EXPECT_EQ(t.parameters()[i].values, m.parameters()[i].values);
  }
}

TEST(Model, OneEpochDoesNotIncreaseTrainingLoss) {
  const Dataset d = synth_dataset(4, 30, {3, 16, 16}, 12);
  const Classifier m(Architecture::kSmallCnn, {3, 16, 16}, 4, 3);
  SgdConfig sgd;
  sgd.learning_rate = 0.01;
  const Classifier t = fine_tune(m, d, 1, sgd, 9);
  EXPECT_LE(t.mean_loss(d.data), m.mean_loss(d.data));
}

TEST(Model, ConstCallsAreThreadSafeAndDeterministic) {
  const Classifier m(Architecture::kSmallCnn, {3, 16, 16}, 10, 4);
  const ImageBatch b = random_batch({3, 16, 16}, 4, 10, 2);
  const auto a = m.input_gradient(b).values;
  std::vector<std::vector<double>> out(4);
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] { out[static_cast<std::size_t>(t)] = m.input_gradient(b).values; });
  }
  for (auto& th : threads) th.join();
  for (const auto& o : out) EXPECT_EQ(o, a);
}
