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

#include "a2p/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace a2p {

std::string to_string(BudgetStrategy strategy) {
  switch (strategy) {
    case BudgetStrategy::kFeedback: return "feedback";
    case BudgetStrategy::kCumulative: return "cumulative";
    case BudgetStrategy::kExponential: return "exponential";
    case BudgetStrategy::kBinarySearch: return "binary_search";
  }
  return "unknown";
}

BudgetStrategy parse_budget_strategy(std::string_view name) {
  if (name == "feedback") return BudgetStrategy::kFeedback;
  if (name == "cumulative") return BudgetStrategy::kCumulative;
  if (name == "exponential") return BudgetStrategy::kExponential;
  if (name == "binary_search") return BudgetStrategy::kBinarySearch;
  throw InputError("unknown budget strategy '" + std::string(name) + "'");
}

void SchedulerConfig::validate() const {
  if (!(initial_budget > 0.0 && initial_budget <= 1.0)) {
    throw InputError("initial budget must lie in (0,1]");
  }
  if (!(feedback_gain > 0.0)) throw InputError("feedback gain must be positive");
  if (!(margin > 0.0 && margin < 0.5)) throw InputError("ASR margin must lie in (0,0.5)");
  if (max_attempts < 1) throw InputError("max attempts must be >= 1");
  if (increment_max_attempts < 1) throw InputError("increment attempts must be >= 1");
  if (!(cumulative_step > 0.0) || !(search_step > 0.0)) {
    throw InputError("budget steps must be positive");
  }
  if (bisection_rounds < 0) throw InputError("bisection rounds must be >= 0");
  if (!(min_budget > 0.0 && min_budget <= max_budget && max_budget <= 1.0)) {
    throw InputError("budget bounds must satisfy 0 < min <= max <= 1");
  }
}

double SchedulerConfig::clamp(double budget) const {
  return std::clamp(budget, min_budget, max_budget);
}

double next_budget(double previous, double asr, const BoundaryState& state,
                   const SchedulerConfig& config) {
  return config.clamp(previous + config.feedback_gain * (state.beta - asr));
}

double increment_budget(double previous, const SchedulerConfig& config) {
  switch (config.strategy) {
    case BudgetStrategy::kCumulative: return config.clamp(previous + config.cumulative_step);
    case BudgetStrategy::kExponential: return config.clamp(previous * 2.0);
    default: throw InputError("increment_budget needs the cumulative or exponential strategy");
  }
}

SearchResult binary_search_budget(const AsrOracle& asr_of, double previous, double beta,
                                  const SchedulerConfig& config) {
  SearchResult r;
  previous = config.clamp(previous);
  auto eval = [&](double e) {
    ++r.evaluations;
    return asr_of(e);
  };

  double lo, hi, lo_asr;
  const double a0 = eval(previous);
  if (a0 > beta) {
    hi = previous;
    lo = config.min_budget;
    if (lo >= hi) return {lo, a0, false, r.evaluations};
    lo_asr = eval(lo);
    if (lo_asr > beta) return {lo, lo_asr, false, r.evaluations};
  } else {
    lo = previous;
    lo_asr = a0;
    bool found = false;
    hi = previous;
    for (int g = 1; g <= 3; ++g) {
      const double e = config.clamp(previous + g * config.search_step);
      if (e <= lo) break;
      const double a = eval(e);
      if (a > beta) {
        hi = e;
        found = true;
        break;
      }
      lo = e;
      lo_asr = a;
    }
    if (!found) return {lo, lo_asr, false, r.evaluations};
  }

  for (int round = 0; round < config.bisection_rounds; ++round) {
    const double mid = 0.5 * (lo + hi);
    const double a = eval(mid);
    if (a <= beta) {
      lo = mid;
      lo_asr = a;
    } else {
      hi = mid;
    }
  }
  return {lo, lo_asr, true, r.evaluations};
}

ProbedSearch binary_search_budget(const Classifier& model, const ImageBatch& batch,
                                  const RegionMasks& regions, double previous,
                                  const BoundaryState& state, const SchedulerConfig& config,
                                  const ProbeConfig& probe) {
  std::vector<ProbeState> seen;
  auto oracle = [&](double e) {
    seen.push_back(masked_pgd(model, batch, regions, e, probe));
    return seen.back().asr_a;
  };
  ProbedSearch out;
  out.search = binary_search_budget(oracle, previous, state.beta, config);
  for (auto& s : seen) {
    if (s.budget == out.search.budget) {
      out.state = std::move(s);
      return out;
    }
  }
  out.state = masked_pgd(model, batch, regions, out.search.budget, probe);
  return out;
}

BoundaryResult initial_boundary(const Classifier& model, const ImageBatch& batch,
                                const SchedulerConfig& config, const ProbeConfig& probe) {
  config.validate();
  const ImageShape shape = batch.shape;
  const RegionMasks full = RegionMasks::full(batch.size(), shape.height, shape.width);
  BoundaryResult out;
  int attempts = 1;
  out.stage0 = masked_pgd(model, batch, full, config.clamp(config.initial_budget), probe);

  if (config.strategy == BudgetStrategy::kBinarySearch &&
      out.stage0.asr_a < config.min_initial_asr) {
    // Grow until ASR-A reaches xi, then bisect for the smallest such budget.
    ProbeState below = out.stage0;
    ProbeState above;
    bool reached = false;
    double e = below.budget;
    while (e < config.max_budget) {
      e = config.clamp(e + config.search_step);
      ProbeState s = masked_pgd(model, batch, full, e, probe);
      ++attempts;
      if (s.asr_a >= config.min_initial_asr) {
        above = std::move(s);
        reached = true;
        break;
      }
      below = std::move(s);
    }
    if (reached) {
      for (int round = 0; round < config.bisection_rounds; ++round) {
        ProbeState s =
            masked_pgd(model, batch, full, 0.5 * (below.budget + above.budget), probe);
        ++attempts;
        if (s.asr_a >= config.min_initial_asr) {
          above = std::move(s);
        } else {
          below = std::move(s);
        }
      }
      out.stage0 = std::move(above);
    } else {
      out.stage0 = std::move(below);
      out.state.warnings.push_back("stage-0 ASR-A never reached the minimum initial ASR");
    }
  }

  out.state.beta = out.stage0.asr_a;
  if (out.state.beta == 0.0) {
    out.state.degenerate = true;
    out.state.warnings.push_back("degenerate boundary: no stage-0 probe flipped a prediction");
  }
  out.state.history.push_back({out.stage0.budget, out.stage0.asr_a, attempts});
  return out;
}

}  // namespace a2p
