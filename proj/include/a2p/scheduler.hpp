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

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "a2p/model.hpp"
#include "a2p/probe.hpp"

namespace a2p {

enum class BudgetStrategy { kFeedback, kCumulative, kExponential, kBinarySearch };

std::string to_string(BudgetStrategy strategy);
BudgetStrategy parse_budget_strategy(std::string_view name);

/// Budget-scheduling parameters. Budgets are in pixel units ([0,1] scale).
struct SchedulerConfig {
  double initial_budget = 4.0 / 255.0;
  /// Gain applied to the ASR-A residual (beta - asr) by the feedback rule.
  double feedback_gain = 16.0 / 255.0;
  /// Accept a stage once |asr - beta| <= margin.
  double margin = 0.05;
  /// Weight of the l-inf term in the budget objective. Stored only; the
  /// scheduling loop realises the objective without it.
  double lambda = 0.0;
  /// Probe rounds per stage for the feedback rule.
  int max_attempts = 3;
  BudgetStrategy strategy = BudgetStrategy::kFeedback;
  double cumulative_step = 2.0 / 255.0;
  /// Probe rounds per stage for the cumulative/exponential increments.
  int increment_max_attempts = 32;
  /// Growth step of the binary-search strategy; growth is capped at 3 steps.
  double search_step = 4.0 / 255.0;
  int bisection_rounds = 8;
  /// Minimum stage-0 ASR-A the binary-search strategy aims for.
  double min_initial_asr = 0.2;
  double min_budget = 4.0 / 255.0;
  double max_budget = 1.0;

  void validate() const;
  double clamp(double budget) const;
};

struct StageBudget {
  double budget = 0.0;
  double asr_a = 0.0;
  int attempts = 0;
};

/// Attack boundary beta (stage-0 ASR-A) plus the per-stage budget history.
struct BoundaryState {
  double beta = 0.0;
  std::vector<StageBudget> history;
  bool degenerate = false;
  std::vector<std::string> warnings;
};

struct BoundaryResult {
  BoundaryState state;
  ProbeState stage0;
};

/// Full-image probe at the initial budget; beta is the resulting ASR-A.
/// Under the binary-search strategy the stage-0 budget is first raised until
/// ASR-A reaches min_initial_asr.
BoundaryResult initial_boundary(const Classifier& model, const ImageBatch& batch,
                                const SchedulerConfig& config, const ProbeConfig& probe);

/// eps + gain * (beta - asr), clamped to [min_budget, max_budget].
double next_budget(double previous, double asr, const BoundaryState& state,
                   const SchedulerConfig& config);

/// +cumulative_step (kCumulative) or x2 (kExponential), clamped.
double increment_budget(double previous, const SchedulerConfig& config);

struct SearchResult {
  double budget = 0.0;
  double asr_a = 0.0;
  bool bracketed = false;
  int evaluations = 0;
};

using AsrOracle = std::function<double(double budget)>;

/// Grows the budget by search_step (at most 3 times) until ASR-A exceeds
/// beta, then bisects the bracket for bisection_rounds rounds and returns the
/// largest budget seen with ASR-A <= beta. Starts with pure bisection
/// downward when ASR-A already exceeds beta at `previous`.
SearchResult binary_search_budget(const AsrOracle& asr_of, double previous, double beta,
                                  const SchedulerConfig& config);

struct ProbedSearch {
  SearchResult search;
  ProbeState state;  // probes at search.budget
};

ProbedSearch binary_search_budget(const Classifier& model, const ImageBatch& batch,
                                  const RegionMasks& regions, double previous,
                                  const BoundaryState& state, const SchedulerConfig& config,
                                  const ProbeConfig& probe);

}  // namespace a2p
