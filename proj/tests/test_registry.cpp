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

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <stdexcept>

#include <gtest/gtest.h>

#include "a2p/io.hpp"
#include "a2p/registry.hpp"

namespace fs = std::filesystem;
using namespace a2p;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) { fs::remove_all(path); }
  ~TempDir() { fs::remove_all(path); }
};

ZooConfig tiny_zoo() {
  ZooConfig c;
  c.models_per_kind = 2;
  c.num_classes = 3;
  c.shape = {1, 4, 4};
  c.train_per_class = 8;
  c.test_per_class = 3;
  c.train.arch = Architecture::kLinear;
  c.train.epochs = 1;
  return c;
}

}  // namespace

TEST(Registry, AddIsAppendOnly) {
  TempDir dir("a2p_test_registry");
  Registry reg(dir.path);
  EXPECT_TRUE(reg.ids().empty());
  const Classifier m(Architecture::kMlp, {1, 4, 4}, 3, 5);
  TrainReport report;
  report.clean_accuracy = 0.5;
  report.seed = 5;
  reg.add("m1", m, report);
  EXPECT_TRUE(reg.contains("m1"));
  EXPECT_EQ(reg.ids(), std::vector<std::string>{"m1"});
  EXPECT_THROW(reg.add("m1", m, report), InputError);
  EXPECT_THROW(reg.add("../escape", m, report), InputError);
  EXPECT_THROW(reg.add("", m, report), InputError);

  const Classifier back = reg.load_model("m1");
  ASSERT_EQ(back.parameters().size(), m.parameters().size());
  for (std::size_t i = 0; i < m.parameters().size(); ++i) {
    EXPECT_EQ(back.parameters()[i].values, m.parameters()[i].values);
  }
  EXPECT_EQ(reg.load_report("m1").clean_accuracy, 0.5);
  EXPECT_THROW(reg.load_model("m2"), InputError);

  // A half-written entry is invisible.
  fs::create_directories(dir.path / "partial");
  io::write_file_atomic(dir.path / "partial" / "model.bin", "x");
  EXPECT_FALSE(reg.contains("partial"));
  EXPECT_EQ(reg.ids().size(), 1u);
}

TEST(Registry, DefaultRootFollowsTheEnvironment) {
  ::setenv(kRegistryEnv, "/tmp/somewhere", 1);
  EXPECT_EQ(Registry::default_root(), fs::path("/tmp/somewhere"));
  ::unsetenv(kRegistryEnv);
  EXPECT_EQ(Registry::default_root(), fs::path("registry"));
}

TEST(ZooConfig, JsonRoundTripAndValidation) {
  ZooConfig c = tiny_zoo();
  c.poison_rate = 0.25;
  EXPECT_EQ(to_json(zoo_config_from_json(to_json(c))), to_json(c));
  EXPECT_THROW(zoo_config_from_json({{"num_classes", 2}}), InputError);
  EXPECT_THROW(zoo_config_from_json({{"shape", {3, 8}}}), InputError);
  EXPECT_THROW(zoo_config_from_json({{"poison_rate", "high"}}), InputError);
}

TEST(Zoo, MembersAreSeededAndTrainedOnce) {
  TempDir dir("a2p_test_zoo");
  Registry reg(dir.path);
  const ZooConfig c = tiny_zoo();
  const auto make = [&](int i) {
    TriggerSpec t;
    t.side = 2;
    t.target_label = zoo_target(c, "p", i);
    return t;
  };
  const auto specs = zoo_members(c, "p", make);
  ASSERT_EQ(specs.size(), 2u);
  EXPECT_NE(specs[0].id, specs[1].id);
  EXPECT_NE(specs[0].seed, specs[1].seed);
  EXPECT_TRUE(specs[0].infected());
  EXPECT_EQ(zoo_members(c, "p", make)[1].id, specs[1].id);
  EXPECT_FALSE(zoo_members(c, "c", nullptr)[0].infected());

  const auto trained = ensure_models(reg, c, specs, 1);
  EXPECT_EQ(trained.size(), 2u);
  EXPECT_TRUE(ensure_models(reg, c, specs, 2).empty());
  const TrainReport r = reg.load_report(specs[0].id);
  ASSERT_TRUE(r.trigger.has_value());
  EXPECT_EQ(r.trigger->target_label, specs[0].plan->target_label());

  const auto a = zoo_data(c);
  const auto b = zoo_data(c);
  EXPECT_EQ(a.train.data.pixels, b.train.data.pixels);
  EXPECT_EQ(a.test.size(), 9u);
}

TEST(ParallelFor, CoversEveryIndexAndPropagatesErrors) {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 3, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(10, 2, [](std::size_t i) {
                 if (i == 7) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}
