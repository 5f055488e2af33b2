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

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "a2p/rng.hpp"
#include "a2p/scheduler.hpp"

using namespace a2p;

namespace {

int steps_to_one(BudgetStrategy strategy) {
  SchedulerConfig c;
  c.strategy = strategy;
  double e = 4.0 / 255.0;
  int steps = 0;
  while (e < 1.0) {
    e = increment_budget(e, c);
    ++steps;
  }
  return steps;
}

ImageBatch random_batch(ImageShape shape, std::size_t n, int classes, std::uint64_t seed) {
  Rng rng(seed);
  ImageBatch b(shape, n);
  for (double& v : b.pixels) v = rng.uniform(0.1, 0.9);
  for (std::size_t i = 0; i < n; ++i) b.labels[i] = static_cast<int>(i % static_cast<std::size_t>(classes));
  return b;
}

}  // namespace

TEST(Feedback, WorkedExampleIsExact) {
  SchedulerConfig c;
  BoundaryState s;
  s.beta = 0.9;
  EXPECT_EQ(next_budget(8.0 / 255.0, 0.4, s, c), 16.0 / 255.0);
}

TEST(Feedback, ClampsToBudgetBounds) {
  SchedulerConfig c;
  BoundaryState s;
  s.beta = 0.0;
  EXPECT_EQ(next_budget(4.0 / 255.0, 1.0, s, c), c.min_budget);
  s.beta = 1.0;
  EXPECT_EQ(next_budget(0.99, 0.0, s, c), 1.0);
  // Residual of the right sign moves the budget the right way.
  s.beta = 0.5;
  EXPECT_GT(next_budget(0.1, 0.2, s, c), 0.1);
  EXPECT_LT(next_budget(0.1, 0.8, s, c), 0.1);
}

TEST(Increment, SingleSteps) {
  SchedulerConfig c;
  c.strategy = BudgetStrategy::kExponential;
  EXPECT_EQ(increment_budget(4.0 / 255.0, c), 8.0 / 255.0);
  c.strategy = BudgetStrategy::kCumulative;
  EXPECT_NEAR(increment_budget(4.0 / 255.0, c), 6.0 / 255.0, 1e-15);
  c.strategy = BudgetStrategy::kFeedback;
  EXPECT_THROW(increment_budget(0.1, c), InputError);
}

TEST(Increment, ExponentialReachesOneInFewerSteps) {
  // Closed forms: 4 * 2^k >= 255 and 4 + 2k >= 255.
  const int exp_oracle = static_cast<int>(std::ceil(std::log2(255.0 / 4.0)));
  const int cum_oracle = static_cast<int>(std::ceil((255.0 - 4.0) / 2.0));
  EXPECT_EQ(steps_to_one(BudgetStrategy::kExponential), exp_oracle);
  EXPECT_EQ(steps_to_one(BudgetStrategy::kCumulative), cum_oracle);
  EXPECT_EQ(exp_oracle, 6);
  EXPECT_LT(steps_to_one(BudgetStrategy::kExponential), steps_to_one(BudgetStrategy::kCumulative));
}

TEST(BinarySearch, ConvergesOnMonotoneOracle) {
  SchedulerConfig c;
  const AsrOracle asr = [](double e) { return std::min(1.0, 10.0 * e); };
  const SearchResult up = binary_search_budget(asr, 4.0 / 255.0, 0.5, c);
  ASSERT_TRUE(up.bracketed);
  // Growth brackets the root in [12/255, 16/255].
  const double width = 4.0 / 255.0;
  EXPECT_LE(up.budget, 0.05);
  EXPECT_LE(0.05 - up.budget, width / 256.0);
  EXPECT_LE(up.asr_a, 0.5);
  EXPECT_EQ(up.evaluations, 4 + c.bisection_rounds);

  const SearchResult down = binary_search_budget(asr, 0.3, 0.5, c);
  ASSERT_TRUE(down.bracketed);
  EXPECT_LE(down.budget, 0.05);
  EXPECT_LE(0.05 - down.budget, (0.3 - c.min_budget) / 256.0);
}

TEST(BinarySearch, GrowthIsCappedAtThreeSteps) {
  SchedulerConfig c;
  const SearchResult r = binary_search_budget([](double) { return 0.0; }, 0.1, 0.5, c);
  EXPECT_FALSE(r.bracketed);
  EXPECT_NEAR(r.budget, 0.1 + 3 * c.search_step, 1e-15);
  EXPECT_EQ(r.evaluations, 4);
}

TEST(Boundary, ReproducibleUnderTheSameSeed) {
  const Classifier m(Architecture::kMlp, {3, 8, 8}, 4, 9);
  const ImageBatch b = random_batch({3, 8, 8}, 12, 4, 1);
  const BoundaryResult a = initial_boundary(m, b, {}, {});
  const BoundaryResult again = initial_boundary(m, b, {}, {});
  EXPECT_EQ(a.state.beta, again.state.beta);
  EXPECT_EQ(a.stage0.probes, again.stage0.probes);
  EXPECT_EQ(a.state.beta, a.stage0.asr_a);
  EXPECT_EQ(a.stage0.budget, 4.0 / 255.0);
}

TEST(Boundary, ConstantModelIsDegenerate) {
  Tensor w{"fc.weight", {3, 4}, std::vector<float>(12, 0.0f)};
  Tensor bias{"fc.bias", {3}, {1.0f, 0.0f, 0.0f}};
  const Classifier m(Architecture::kLinear, {1, 2, 2}, 3, {w, bias});
  ImageBatch b = random_batch({1, 2, 2}, 3, 1, 2);  // every label is 0
  const BoundaryResult r = initial_boundary(m, b, {}, {});
  EXPECT_EQ(r.state.beta, 0.0);
  EXPECT_TRUE(r.state.degenerate);
  EXPECT_FALSE(r.state.warnings.empty());
}

TEST(Boundary, BinarySearchRaisesStageZeroToTheMinimumAsr) {
  const Classifier m(Architecture::kMlp, {3, 8, 8}, 4, 9);
  ImageBatch b = random_batch({3, 8, 8}, 12, 4, 1);
  b.labels = m.predict(b);  // clean ASR-A is zero
  SchedulerConfig c;
  c.strategy = BudgetStrategy::kBinarySearch;
  c.min_initial_asr = 0.5;
  c.min_budget = 0.001;
  c.initial_budget = 0.001;
  ProbeConfig p;
  p.step_rule = StepRule::kBudgetScaled;
  SchedulerConfig plain = c;
  plain.strategy = BudgetStrategy::kFeedback;
  ASSERT_LT(initial_boundary(m, b, plain, p).state.beta, 0.5);
  const BoundaryResult r = initial_boundary(m, b, c, p);
  EXPECT_GE(r.state.beta, 0.5);
  EXPECT_GE(r.stage0.budget, c.initial_budget);
  EXPECT_GT(r.state.history.front().attempts, 1);
}

TEST(SchedulerConfig, Validation) {
  SchedulerConfig c;
  c.margin = 0.0;
  EXPECT_THROW(c.validate(), InputError);
  c = {};
  c.min_budget = 0.5;
  c.max_budget = 0.4;
  EXPECT_THROW(c.validate(), InputError);
  EXPECT_THROW(parse_budget_strategy("greedy"), InputError);
  for (auto s : {BudgetStrategy::kFeedback, BudgetStrategy::kCumulative, BudgetStrategy::kExponential,
                 BudgetStrategy::kBinarySearch}) {
    EXPECT_EQ(parse_budget_strategy(to_string(s)), s);
  }
}
