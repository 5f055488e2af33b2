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

#include "a2p/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>

#include "a2p/data.hpp"
#include "a2p/io.hpp"
#include "a2p/outlier.hpp"
#include "a2p/rng.hpp"

namespace a2p {

namespace fs = std::filesystem;

double detection_acc(std::span<const ModelRow> rows, const std::optional<std::string>& attack) {
  std::size_t total = 0, hits = 0;
  for (const auto& r : rows) {
    if (!r.infected || (attack && r.attack_id != *attack)) continue;
    ++total;
    hits += r.flagged;
  }
  if (total == 0) throw InputError("no infected models match the filter");
  return static_cast<double>(hits) / static_cast<double>(total);
}

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("scores and labels differ in length");
  std::vector<std::pair<double, int>> v;
  v.reserve(scores.size());
  std::uint64_t pos = 0, neg = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (std::isnan(scores[i])) throw InputError("AUROC score is NaN");
    const int y = labels[i] != 0;
    v.emplace_back(scores[i], y);
    (y ? pos : neg)++;
  }
  if (pos == 0 || neg == 0) throw InputError("AUROC needs both infected and clean models");
  std::sort(v.begin(), v.end());
  // Twice the win count: a win is 2, a tie is 1.
  std::uint64_t twice_wins = 0, negatives_below = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    std::uint64_t p = 0, n = 0;
    while (j < v.size() && v[j].first == v[i].first) {
      (v[j].second ? p : n)++;
      ++j;
    }
    twice_wins += p * (2 * negatives_below + n);
    negatives_below += n;
    i = j;
  }
  return static_cast<double>(twice_wins) / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
}

double average_attacks(std::span<const double> accs) {
  if (accs.empty()) throw InputError("average_attacks needs at least one attack");
  double sum = 0.0;
  for (double a : accs) sum += a;
  return sum / static_cast<double>(accs.size());
}

BenchmarkResult summarize(std::string point, std::vector<ModelRow> rows) {
  BenchmarkResult out;
  out.point = std::move(point);
  std::set<std::string> attacks;
  std::vector<double> scores;
  std::vector<int> labels;
  std::size_t clean = 0, false_pos = 0, flagged_inf = 0, right_target = 0;
  for (const auto& r : rows) {
    out.pgd_calls += r.pgd_calls;
    scores.push_back(r.max_index);
    labels.push_back(r.infected);
    if (r.infected) {
      attacks.insert(r.attack_id);
      if (r.flagged) {
        ++flagged_inf;
        right_target += r.suspected_target && r.true_target && *r.suspected_target == *r.true_target;
      }
    } else {
      ++clean;
      false_pos += r.flagged;
    }
  }
  std::vector<double> accs;
  for (const auto& a : attacks) {
    out.per_attack_acc[a] = detection_acc(rows, a);
    accs.push_back(out.per_attack_acc[a]);
  }
  if (!attacks.empty()) {
    out.acc = detection_acc(rows);
    out.average_attacks = average_attacks(accs);
  }
  if (clean > 0) out.false_positive_rate = static_cast<double>(false_pos) / static_cast<double>(clean);
  if (!attacks.empty() && clean > 0) out.auroc = auroc(scores, labels);
  if (flagged_inf > 0) {
    out.target_accuracy = static_cast<double>(right_target) / static_cast<double>(flagged_inf);
  }
  out.rows = std::move(rows);
  return out;
}

namespace {

nlohmann::json opt(const std::optional<double>& v) {
  return v ? io::number(*v) : nlohmann::json(nullptr);
}


}  // namespace

nlohmann::json to_json(const BenchmarkResult& r) {
  nlohmann::json per = nlohmann::json::object();
  for (const auto& [k, v] : r.per_attack_acc) per[k] = v;
  std::size_t infected = 0;
  for (const auto& row : r.rows) infected += row.infected;
  return {
      {"point", r.point},
      {"models", r.rows.size()},
      {"infected_models", infected},
      {"clean_models", r.rows.size() - infected},
      {"per_attack_acc", per},
      {"acc", opt(r.acc)},
      {"auroc", opt(r.auroc)},
      {"average_attacks", opt(r.average_attacks)},
      {"false_positive_rate", opt(r.false_positive_rate)},
      {"target_accuracy", opt(r.target_accuracy)},
      {"pgd_calls", r.pgd_calls},
  };
}

std::string to_string(SweepKind kind) {
  switch (kind) {
    case SweepKind::kTriggerSize: return "trigger_size";
    case SweepKind::kTransparency: return "transparency";
    case SweepKind::kMultiTrigger: return "multi_trigger";
    case SweepKind::kSamplesPerClass: return "samples_per_class";
    case SweepKind::kRegionStrategy: return "region_strategy";
    case SweepKind::kBudgetStrategy: return "budget_strategy";
    case SweepKind::kRegionBudgetGrid: return "region_budget_grid";
  }
  return "?";
}

std::vector<SweepKind> all_sweep_kinds() {
  return {SweepKind::kTriggerSize,     SweepKind::kTransparency,   SweepKind::kMultiTrigger,
          SweepKind::kSamplesPerClass, SweepKind::kRegionStrategy, SweepKind::kBudgetStrategy,
          SweepKind::kRegionBudgetGrid};
}

SweepKind parse_sweep_kind(std::string_view name) {
  for (auto k : all_sweep_kinds()) {
    if (to_string(k) == name) return k;
  }
  throw InputError("unknown sweep '" + std::string(name) + "'");
}

void BenchConfig::validate() const {
  zoo.validate();
  detection.validate();
  if (workers < 1) throw InputError("workers must be >= 1");
  if (!(blend_min > 0.0 && blend_min <= blend_max && blend_max <= 1.0)) {
    throw InputError("blend range must satisfy 0 < min <= max <= 1");
  }
  for (int s : trigger_sides) {
    if (s < 1 || s > std::min(zoo.shape.height, zoo.shape.width)) {
      throw InputError("trigger side " + std::to_string(s) + " does not fit the image");
    }
  }
  for (int s : grid_sides) {
    if (s < 1 || s > std::min(zoo.shape.height, zoo.shape.width)) {
      throw InputError("grid side " + std::to_string(s) + " does not fit the image");
    }
  }
  for (double b : grid_budgets) {
    if (!(b > 0.0 && b <= 1.0)) throw InputError("grid budgets must lie in (0,1]");
  }
  for (int n : samples_per_class) {
    if (n < 1 || n > zoo.test_per_class) throw InputError("samples_per_class point out of range");
  }
}

nlohmann::json to_json(const BenchConfig& c) {
  return {
      {"zoo", to_json(c.zoo)},
      {"detection", to_json(c.detection)},
      {"workers", c.workers},
      {"train_missing", c.train_missing},
      {"trigger_sides", c.trigger_sides},
      {"transparencies", c.transparencies},
      {"blend_convention",
       c.blend_convention == BlendConvention::kTransparency ? "transparency" : "mixing_weight"},
      {"blend_min", c.blend_min},
      {"blend_max", c.blend_max},
      {"patch_side", c.patch_side},
      {"samples_per_class", c.samples_per_class},
      {"grid_sides", c.grid_sides},
      {"grid_budgets", c.grid_budgets},
  };
}

BenchConfig bench_config_from_json(const nlohmann::json& j) {
  BenchConfig c;
  try {
    if (j.contains("zoo")) c.zoo = zoo_config_from_json(j.at("zoo"));
    if (j.contains("detection")) c.detection = detection_config_from_json(j.at("detection"));
    c.workers = j.value("workers", c.workers);
    c.train_missing = j.value("train_missing", c.train_missing);
    c.trigger_sides = j.value("trigger_sides", c.trigger_sides);
    c.transparencies = j.value("transparencies", c.transparencies);
    if (j.contains("blend_convention")) {
      const auto s = j.at("blend_convention").get<std::string>();
      if (s == "transparency") {
        c.blend_convention = BlendConvention::kTransparency;
      } else if (s == "mixing_weight") {
        c.blend_convention = BlendConvention::kMixingWeight;
      } else {
        throw InputError("unknown blend_convention '" + s + "'");
      }
    }
    c.blend_min = j.value("blend_min", c.blend_min);
    c.blend_max = j.value("blend_max", c.blend_max);
    c.patch_side = j.value("patch_side", c.patch_side);
    c.samples_per_class = j.value("samples_per_class", c.samples_per_class);
    c.grid_sides = j.value("grid_sides", c.grid_sides);
    c.grid_budgets = j.value("grid_budgets", c.grid_budgets);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad bench config: ") + e.what());
  }
  c.validate();
  return c;
}

std::vector<ModelSpec> clean_family(const ZooConfig& zoo) { return zoo_members(zoo, "clean", nullptr); }

std::vector<ModelSpec> patch_family(const ZooConfig& zoo, int side) {
  const std::string family = "patch" + std::to_string(side);
  return zoo_members(zoo, family, [&](int i) {
    TriggerSpec t;
    t.kind = TriggerKind::kPatch;
    t.side = side;
    t.location = Location::kBottomRight;
    t.target_label = zoo_target(zoo, family, i);
    return t;
  });
}

std::vector<ModelSpec> blend_family(const ZooConfig& zoo, double blend_min, double blend_max) {
  const int m = zoo.models_per_kind;
  return zoo_members(zoo, "blend", [&](int i) {
    const double sigma =
        m == 1 ? blend_min : blend_min + (blend_max - blend_min) * i / static_cast<double>(m - 1);
    return blend_trigger(sigma, BlendConvention::kMixingWeight, zoo_target(zoo, "blend", i),
                         derive_seed(zoo.seed, "blend-pattern", static_cast<std::uint64_t>(i)));
  });
}

std::vector<ModelSpec> blend_family_at(const ZooConfig& zoo, double value,
                                       BlendConvention convention) {
  char tag[32];
  std::snprintf(tag, sizeof tag, "blend%s%.3f",
                convention == BlendConvention::kTransparency ? "t" : "m", value);
  const std::string family = tag;
  return zoo_members(zoo, family, [&](int i) {
    return blend_trigger(value, convention, zoo_target(zoo, family, i),
                         derive_seed(zoo.seed, "blend-pattern", static_cast<std::uint64_t>(i)));
  });
}

std::vector<ModelSpec> multi_patch_family(const ZooConfig& zoo) {
  return zoo_members(zoo, "multi", [&](int i) {
    TriggerSpec t;
    t.kind = TriggerKind::kMultiPatch;
    t.locations = {Location::kTopLeft, Location::kTopRight, Location::kBottomRight,
                   Location::kBottomLeft};
    t.pattern_seed = derive_seed(zoo.seed, "multi-pattern", static_cast<std::uint64_t>(i));
    t.target_label = zoo_target(zoo, "multi", i);
    return t;
  });
}

std::vector<ModelRow> detect_models(const std::vector<ModelSpec>& specs, const Registry& registry,
                                    const ImageBatch& probe_set, const DetectionConfig& config,
                                    const std::string& point, int workers,
                                    const std::function<void(const ModelRow&)>& on_row) {
  std::vector<std::optional<ModelRow>> slots(specs.size());
  std::mutex row_mutex;
  parallel_for(specs.size(), workers, [&](std::size_t i) {
    const ModelSpec& s = specs[i];
    if (!registry.contains(s.id)) return;
    const Classifier model = registry.load_model(s.id);
    const auto t0 = std::chrono::steady_clock::now();
    const DetectionRun run = detect(model, probe_set, config);
    ModelRow row;
    row.point = point;
    row.model_id = s.id;
    row.attack_id = s.plan ? s.plan->trigger.attack_id() : "clean";
    row.infected = s.infected();
    if (s.plan) row.true_target = s.plan->target_label();
    row.flagged = run.report.infected;
    row.suspected_target = run.report.suspected_target;
    row.stopping_stage = run.report.stopping_stage;
    row.max_index = run.report.max_anomaly_index();
    row.pgd_calls = run.report.pgd_calls;
    row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_row) {
      std::lock_guard lock(row_mutex);
      on_row(row);
    }
    slots[i] = std::move(row);
  });
  std::vector<ModelRow> rows;
  for (auto& s : slots) {
    if (s) rows.push_back(std::move(*s));
  }
  return rows;
}

GridCell probe_corner(const Classifier& model, const ImageBatch& probe_set, int side,
                      double budget, const ProbeConfig& probe, double tau) {
  const ImageShape shape = probe_set.shape;
  const RegionMasks region = corner_region(probe_set.size(), shape, side, true, true);
  const ProbeState st = masked_pgd(model, probe_set, region, budget, probe);
  const ClassScores cs = class_scores(model, probe_set, st.probes);
  const AnomalyResult an = mad_anomaly(cs.scores, tau);
  GridCell cell;
  const auto& md = model.metadata();
  cell.attack_id = md.attack_id;
  cell.infected = md.target_label.has_value();
  cell.true_target = md.target_label;
  cell.region_side = side;
  cell.budget = budget;
  cell.asr_a = st.asr_a;
  cell.max_index = an.max_index;
  cell.argmax_class = an.argmax_class;
  cell.target_index = md.target_label ? an.indices[static_cast<std::size_t>(*md.target_label)]
                                      : std::numeric_limits<double>::quiet_NaN();
  return cell;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<int>& v) { return v ? std::to_string(*v) : ""; }

std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<int> parse_opt_int(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stoi(s);
}

}  // namespace

std::string results_csv_header() {
  return "point,model_id,attack_id,infected,true_target,flagged,suspected_target,stopping_stage,"
         "max_index,pgd_calls";
}

std::string to_csv(const ModelRow& r) {
  return r.point + "," + r.model_id + "," + r.attack_id + "," + (r.infected ? "1" : "0") + "," +
         fmt(r.true_target) + "," + (r.flagged ? "1" : "0") + "," + fmt(r.suspected_target) + "," +
         fmt(r.stopping_stage) + "," + fmt(r.max_index) + "," + std::to_string(r.pgd_calls);
}

ModelRow model_row_from_csv(std::string_view line) {
  const auto f = split_csv(line);
  if (f.size() != 10) throw FormatError("results row has " + std::to_string(f.size()) + " fields, expected 10");
  ModelRow r;
  try {
    r.point = f[0];
    r.model_id = f[1];
    r.attack_id = f[2];
    r.infected = f[3] == "1";
    r.true_target = parse_opt_int(f[4]);
    r.flagged = f[5] == "1";
    r.suspected_target = parse_opt_int(f[6]);
    r.stopping_stage = parse_opt_int(f[7]);
    r.max_index = std::strtod(f[8].c_str(), nullptr);
    r.pgd_calls = std::stoi(f[9]);
  } catch (const std::exception& e) {
    throw FormatError("bad results row '" + std::string(line) + "': " + e.what());
  }
  return r;
}

std::vector<ModelRow> read_results_csv(const fs::path& path) {
  std::vector<ModelRow> rows;
  if (!fs::exists(path)) return rows;
  std::istringstream in(io::read_file(path));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      if (line != results_csv_header()) throw FormatError(path.string() + ": unexpected header");
      header = false;
      continue;
    }
    if (!line.empty()) rows.push_back(model_row_from_csv(line));
  }
  return rows;
}

std::string grid_csv_header() {
  return "model_id,attack_id,infected,true_target,region_side,budget,asr_a,max_index,argmax_class,"
         "target_index";
}

std::string to_csv(const GridCell& c) {
  return c.model_id + "," + c.attack_id + "," + (c.infected ? "1" : "0") + "," + fmt(c.true_target) +
         "," + std::to_string(c.region_side) + "," + fmt(c.budget) + "," + fmt(c.asr_a) + "," +
         fmt(c.max_index) + "," + std::to_string(c.argmax_class) + "," + fmt(c.target_index);
}

nlohmann::json to_json(const SweepOutput& out) {
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : out.results) results.push_back(to_json(r));
  return {{"sweep", to_string(out.kind)}, {"results", results}, {"missing", out.missing}};
}

namespace {

/// One sweep point: the models it covers and the detection config it uses.
struct PointPlan {
  std::string point;
  std::vector<ModelSpec> specs;
  DetectionConfig detection;
};

std::string budget_label(double b) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g/255", b * 255.0);
  return buf;
}

std::vector<PointPlan> plan_points(SweepKind kind, const BenchConfig& c) {
  const auto clean = clean_family(c.zoo);
  auto with_clean = [&](std::vector<ModelSpec> v) {
    v.insert(v.end(), clean.begin(), clean.end());
    return v;
  };
  std::vector<PointPlan> plan;
  switch (kind) {
    case SweepKind::kTriggerSize:
      for (int side : c.trigger_sides) {
        plan.push_back({"side=" + std::to_string(side), with_clean(patch_family(c.zoo, side)), c.detection});
      }
      break;
    case SweepKind::kTransparency:
      for (double v : c.transparencies) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "blend=%g", v);
        plan.push_back({buf, with_clean(blend_family_at(c.zoo, v, c.blend_convention)), c.detection});
      }
      break;
    case SweepKind::kMultiTrigger:
      plan.push_back({"multi_patch", with_clean(multi_patch_family(c.zoo)), c.detection});
      break;
    case SweepKind::kSamplesPerClass: {
      auto specs = patch_family(c.zoo, c.patch_side);
      const auto blend = blend_family(c.zoo, c.blend_min, c.blend_max);
      specs.insert(specs.end(), blend.begin(), blend.end());
      specs = with_clean(specs);
      for (int n : c.samples_per_class) {
        DetectionConfig d = c.detection;
        d.samples_per_class = n;
        plan.push_back({"spc=" + std::to_string(n), specs, d});
      }
      break;
    }
    case SweepKind::kRegionStrategy:
      for (auto s : {RegionStrategy::kAttention, RegionStrategy::kRandom}) {
        DetectionConfig d = c.detection;
        d.region_strategy = s;
        plan.push_back({to_string(s), with_clean(patch_family(c.zoo, c.patch_side)), d});
      }
      break;
    case SweepKind::kBudgetStrategy:
      for (auto s : {BudgetStrategy::kFeedback, BudgetStrategy::kCumulative,
                     BudgetStrategy::kExponential, BudgetStrategy::kBinarySearch}) {
        DetectionConfig d = c.detection;
        d.scheduler.strategy = s;
        plan.push_back({to_string(s), with_clean(patch_family(c.zoo, c.patch_side)), d});
      }
      break;
    case SweepKind::kRegionBudgetGrid: {
      auto specs = blend_family(c.zoo, c.blend_min, c.blend_max);
      const auto patch = patch_family(c.zoo, c.patch_side);
      specs.insert(specs.end(), patch.begin(), patch.end());
      plan.push_back({"grid", specs, c.detection});
      break;
    }
  }
  return plan;
}

ImageBatch probe_set_for(const Dataset& test, const DetectionConfig& d) {
  return sample_per_class(test, d.samples_per_class, derive_seed(d.seed, "probe-set"));
}

void write_text_atomic(const fs::path& path, const std::vector<std::string>& lines) {
  std::string text;
  for (const auto& l : lines) text += l + "\n";
  io::write_file_atomic(path, text);
}

}  // namespace

SweepOutput run_sweep(SweepKind kind, const BenchConfig& config, Registry& registry,
                      const fs::path& run_dir) {
  config.validate();
  SweepOutput out;
  out.kind = kind;
  const auto plan = plan_points(kind, config);

  std::vector<ModelSpec> all_specs;
  std::set<std::string> seen;
  for (const auto& p : plan) {
    for (const auto& s : p.specs) {
      if (seen.insert(s.id).second) all_specs.push_back(s);
    }
  }
  if (config.train_missing) {
    ensure_models(registry, config.zoo, all_specs, config.workers);
  } else {
    for (const auto& s : all_specs) {
      if (!registry.contains(s.id)) out.missing.push_back(s.id);
    }
  }

  nlohmann::json snapshot = to_json(config);
  snapshot["sweep"] = to_string(kind);
  std::map<std::pair<std::string, std::string>, ModelRow> done;
  std::ofstream appender;
  if (!run_dir.empty()) {
    fs::create_directories(run_dir);
    const fs::path cfg_path = run_dir / "config.json";
    if (fs::exists(cfg_path)) {
      nlohmann::json previous = io::read_json(cfg_path);
      previous.erase("workers");
      nlohmann::json current = snapshot;
      current.erase("workers");
      if (previous != current) {
        throw InputError(run_dir.string() + " holds a run with a different config");
      }
    }
    io::write_json(cfg_path, snapshot);
    for (auto& r : read_results_csv(run_dir / "results.csv")) {
      done.emplace(std::make_pair(r.point, r.model_id), std::move(r));
    }
    if (!fs::exists(run_dir / "results.csv")) write_text_atomic(run_dir / "results.csv", {results_csv_header()});
    appender.open(run_dir / "results.csv", std::ios::app);
  }

  const DatasetSplits data = zoo_data(config.zoo);
  std::vector<std::pair<std::string, double>> timings;

  if (kind == SweepKind::kRegionBudgetGrid) {
    const DetectionConfig& d = plan.front().detection;
    const ImageBatch probe = probe_set_for(data.test, d);
    const auto& specs = plan.front().specs;
    std::vector<std::vector<GridCell>> cells(specs.size());
    parallel_for(specs.size(), config.workers, [&](std::size_t i) {
      if (!registry.contains(specs[i].id)) return;
      const Classifier model = registry.load_model(specs[i].id);
      for (int side : config.grid_sides) {
        for (double b : config.grid_budgets) {
          GridCell cell = probe_corner(model, probe, side, b, d.probe, d.tau);
          cell.model_id = specs[i].id;
          cells[i].push_back(cell);
        }
      }
    });
    std::map<std::pair<int, double>, std::vector<ModelRow>> by_point;
    for (std::size_t i = 0; i < specs.size(); ++i) {
      for (const auto& cell : cells[i]) {
        out.grid.push_back(cell);
        ModelRow row;
        row.point = "side=" + std::to_string(cell.region_side) + ";eps=" + budget_label(cell.budget);
        row.model_id = cell.model_id;
        row.attack_id = cell.attack_id;
        row.infected = cell.infected;
        row.true_target = cell.true_target;
        row.flagged = cell.max_index > d.tau;
        if (row.flagged) row.suspected_target = cell.argmax_class;
        row.max_index = cell.max_index;
        row.pgd_calls = 1;
        by_point[{cell.region_side, cell.budget}].push_back(row);
      }
    }
    for (auto& [key, rows] : by_point) {
      std::string name = rows.front().point;
      out.results.push_back(summarize(std::move(name), std::move(rows)));
    }
    if (!run_dir.empty()) {
      std::vector<std::string> lines{grid_csv_header()};
      for (const auto& c : out.grid) lines.push_back(to_csv(c));
      write_text_atomic(run_dir / "grid.csv", lines);
      std::vector<std::string> res{results_csv_header()};
      for (const auto& r : out.results) {
        for (const auto& row : r.rows) res.push_back(to_csv(row));
      }
      appender.close();
      write_text_atomic(run_dir / "results.csv", res);
      io::write_json(run_dir / "summary.json", to_json(out));
    }
    return out;
  }

  for (const auto& p : plan) {
    std::vector<ModelSpec> todo;
    for (const auto& s : p.specs) {
      if (!done.count({p.point, s.id})) todo.push_back(s);
    }
    if (!todo.empty()) {
      const ImageBatch probe = probe_set_for(data.test, p.detection);
      auto rows = detect_models(todo, registry, probe, p.detection, p.point, config.workers,
                                [&](const ModelRow& r) {
                                  if (appender.is_open()) appender << to_csv(r) << "\n" << std::flush;
                                });
      for (auto& r : rows) {
        timings.emplace_back(r.point + "," + r.model_id, r.seconds);
        done.emplace(std::make_pair(r.point, r.model_id), std::move(r));
      }
    }
    std::vector<ModelRow> rows;
    for (const auto& s : p.specs) {
      auto it = done.find({p.point, s.id});
      if (it != done.end()) rows.push_back(it->second);
    }
    out.results.push_back(summarize(p.point, std::move(rows)));
  }

  if (!run_dir.empty()) {
    appender.close();
    std::vector<std::string> res{results_csv_header()};
    for (const auto& r : out.results) {
      for (const auto& row : r.rows) res.push_back(to_csv(row));
    }
    write_text_atomic(run_dir / "results.csv", res);
    if (!timings.empty()) {
      std::ofstream t(run_dir / "timings.csv", std::ios::app);
      for (const auto& [key, secs] : timings) t << key << "," << fmt(secs) << "\n";
    }
    io::write_json(run_dir / "summary.json", to_json(out));
  }
  return out;
}

}  // namespace a2p
