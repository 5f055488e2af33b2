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

#include <span>
#include <string>
#include <vector>

#include "a2p/common.hpp"
#include "a2p/model.hpp"

namespace a2p {

/// Normal-consistency constant that turns a MAD into a sigma estimate.
inline constexpr double kMadConsistency = 1.4826;

struct ClassScores {
  /// scores[c]: mean softmax mass on class c over probed images whose true
  /// label is not c.
  std::vector<double> scores;
  std::vector<std::string> warnings;
};

ClassScores class_scores(const Classifier& model, const ImageBatch& batch,
                         std::span<const double> probes);
/// Same statistic from precomputed softmax rows.
ClassScores class_scores(const Matrix& probabilities, std::span<const int> labels);

struct AnomalyResult {
  std::vector<double> indices;
  double max_index = 0.0;
  int argmax_class = 0;
  bool infected = false;
  double tau = 0.0;
};

/// index_c = (s_c - median) / (1.4826 * MAD). When MAD is zero, scores above
/// the median get +inf and the rest 0. infected <=> max_index > tau.
AnomalyResult mad_anomaly(std::span<const double> scores, double tau);

double median(std::vector<double> values);

}  // namespace a2p
