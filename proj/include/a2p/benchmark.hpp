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

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "a2p/detection.hpp"
#include "a2p/registry.hpp"

namespace a2p {

/// One detection outcome in a sweep.
struct ModelRow {
  std::string point;
  std::string model_id;
  std::string attack_id;
  bool infected = false;
  std::optional<int> true_target;
  bool flagged = false;
  std::optional<int> suspected_target;
  std::optional<int> stopping_stage;
  /// Largest anomaly index over the executed stages; the AUROC score.
  double max_index = 0.0;
  int pgd_calls = 0;
  /// Wall time. Kept out of results.csv so that reruns match byte for byte.
  double seconds = 0.0;
};

/// Fraction of infected rows (optionally of one attack id) flagged infected.
/// Throws InputError when no infected row passes the filter.
double detection_acc(std::span<const ModelRow> rows,
                     const std::optional<std::string>& attack = std::nullopt);

/// P(score of a random positive > score of a random negative), ties count
/// one half. labels: nonzero = infected. Throws InputError unless both
/// classes are present.
double auroc(std::span<const double> scores, std::span<const int> labels);

/// Unweighted mean of per-attack ACCs. Throws InputError when empty.
double average_attacks(std::span<const double> accs);

struct BenchmarkResult {
  std::string point;
  std::vector<ModelRow> rows;
  std::map<std::string, double> per_attack_acc;
  std::optional<double> acc;
  std::optional<double> auroc;
  std::optional<double> average_attacks;
  std::optional<double> false_positive_rate;
  /// Among flagged infected rows, the fraction naming the true target.
  std::optional<double> target_accuracy;
  int pgd_calls = 0;
};

BenchmarkResult summarize(std::string point, std::vector<ModelRow> rows);
nlohmann::json to_json(const BenchmarkResult& result);

enum class SweepKind {
  kTriggerSize,
  kTransparency,
  kMultiTrigger,
  kSamplesPerClass,
  kRegionStrategy,
  kBudgetStrategy,
  kRegionBudgetGrid,
};

std::string to_string(SweepKind kind);
SweepKind parse_sweep_kind(std::string_view name);
std::vector<SweepKind> all_sweep_kinds();

struct BenchConfig {
  ZooConfig zoo;
  DetectionConfig detection;
  int workers = 1;
  /// Train zoo members missing from the registry; when false they are
  /// reported in SweepOutput::missing and skipped.
  bool train_missing = true;
  std::vector<int> trigger_sides{2, 4, 6, 8};
  /// Blend values of the transparency sweep, read under blend_convention.
  std::vector<double> transparencies{0.7, 0.8, 0.9, 0.95};
  BlendConvention blend_convention = BlendConvention::kTransparency;
  /// Mixing weights spread over the default blend family.
  double blend_min = 0.1;
  double blend_max = 0.3;
  int patch_side = 4;
  std::vector<int> samples_per_class{4, 10, 20, 40};
  /// Bottom-right square sides and budgets of the region/budget grid.
  std::vector<int> grid_sides{2, 4, 8, 16};
  std::vector<double> grid_budgets{2.0 / 255, 4.0 / 255, 8.0 / 255,
                                   16.0 / 255, 32.0 / 255, 64.0 / 255};

  void validate() const;
};

nlohmann::json to_json(const BenchConfig& config);
BenchConfig bench_config_from_json(const nlohmann::json& j);

/// Zoo families used by the sweeps. Patch triggers sit bottom-right; blend
/// member i mixes at blend_min + (blend_max - blend_min) * i / (M - 1).
std::vector<ModelSpec> clean_family(const ZooConfig& zoo);
std::vector<ModelSpec> patch_family(const ZooConfig& zoo, int side);
std::vector<ModelSpec> blend_family(const ZooConfig& zoo, double blend_min, double blend_max);
std::vector<ModelSpec> blend_family_at(const ZooConfig& zoo, double value,
                                       BlendConvention convention);
/// Random 3x3 patches at the four corners.
std::vector<ModelSpec> multi_patch_family(const ZooConfig& zoo);

/// Detects every spec that is in the registry, in spec order. `on_row`, if
/// set, sees each row as soon as it is ready (calls are serialised).
std::vector<ModelRow> detect_models(const std::vector<ModelSpec>& specs, const Registry& registry,
                                    const ImageBatch& probe_set, const DetectionConfig& config,
                                    const std::string& point, int workers,
                                    const std::function<void(const ModelRow&)>& on_row = {});

/// Probe restricted to the bottom-right side x side square at a fixed budget.
struct GridCell {
  std::string model_id;
  std::string attack_id;
  bool infected = false;
  std::optional<int> true_target;
  int region_side = 0;
  double budget = 0.0;
  double asr_a = 0.0;
  double max_index = 0.0;
  int argmax_class = 0;
  /// Anomaly index of the true target (NaN for clean models).
  double target_index = 0.0;
};

GridCell probe_corner(const Classifier& model, const ImageBatch& probe_set, int side,
                      double budget, const ProbeConfig& probe, double tau);

struct SweepOutput {
  SweepKind kind = SweepKind::kTriggerSize;
  std::vector<BenchmarkResult> results;
  std::vector<GridCell> grid;
  std::vector<std::string> missing;
};

nlohmann::json to_json(const SweepOutput& output);

/// Runs one sweep. With a run directory, rows already in results.csv are
/// reused instead of recomputed, new rows are appended as they finish, and
/// the directory ends with config.json, results.csv (canonical order),
/// timings.csv, summary.json and, for the grid, grid.csv.
SweepOutput run_sweep(SweepKind kind, const BenchConfig& config, Registry& registry,
                      const std::filesystem::path& run_dir = {});

/// CSV row codec for results.csv.
std::string results_csv_header();
std::string to_csv(const ModelRow& row);
ModelRow model_row_from_csv(std::string_view line);
std::vector<ModelRow> read_results_csv(const std::filesystem::path& path);

std::string grid_csv_header();
std::string to_csv(const GridCell& cell);

}  // namespace a2p
