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

#include "a2p/outlier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "a2p/probe.hpp"

namespace a2p {

double median(std::vector<double> values) {
  if (values.empty()) throw InputError("median of an empty sequence");
  const std::size_t n = values.size();
  const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
  std::nth_element(values.begin(), mid, values.end());
  if (n % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(values.begin(), mid);
  return 0.5 * (lower + upper);
}

ClassScores class_scores(const Matrix& probabilities, std::span<const int> labels) {
  if (labels.size() != probabilities.rows) {
    throw InputError("one label per probability row is required");
  }
  const std::size_t k = probabilities.cols;
  ClassScores out;
  out.scores.assign(k, 0.0);
  std::vector<std::size_t> counts(k, 0);
  for (std::size_t i = 0; i < probabilities.rows; ++i) {
    const auto row = probabilities.row(i);
    for (std::size_t c = 0; c < k; ++c) {
      if (labels[i] == static_cast<int>(c)) continue;
      out.scores[c] += row[c];
      ++counts[c];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      out.warnings.push_back("class " + std::to_string(c) + " has no off-class probed samples");
      out.scores[c] = 0.0;
    } else {
      out.scores[c] /= static_cast<double>(counts[c]);
    }
  }
  return out;
}

ClassScores class_scores(const Classifier& model, const ImageBatch& batch,
                         std::span<const double> probes) {
  return class_scores(model.forward(probed_batch(batch, probes)), batch.labels);
}

AnomalyResult mad_anomaly(std::span<const double> scores, double tau) {
  if (scores.size() < 3) throw InputError("MAD anomaly detection needs at least 3 classes");
  std::vector<double> s(scores.begin(), scores.end());
  const double m = median(s);
  std::vector<double> dev(s.size());
  for (std::size_t c = 0; c < s.size(); ++c) dev[c] = std::abs(s[c] - m);
  const double mad = median(dev);

  AnomalyResult r;
  r.tau = tau;
  r.indices.resize(s.size());
  for (std::size_t c = 0; c < s.size(); ++c) {
    if (mad == 0.0) {
      r.indices[c] = s[c] > m ? std::numeric_limits<double>::infinity() : 0.0;
    } else {
      r.indices[c] = (s[c] - m) / (kMadConsistency * mad);
    }
  }
  r.argmax_class = static_cast<int>(argmax(r.indices));
  r.max_index = r.indices[static_cast<std::size_t>(r.argmax_class)];
  r.infected = r.max_index > tau;
  return r;
}

}  // namespace a2p
