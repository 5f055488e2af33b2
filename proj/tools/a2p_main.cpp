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

// a2p command-line tool: datasets, training, detection, sweeps, unlearning
// and report summaries over a model registry and a runs directory.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "a2p/benchmark.hpp"
#include "a2p/data.hpp"
#include "a2p/detection.hpp"
#include "a2p/io.hpp"
#include "a2p/registry.hpp"
#include "a2p/rng.hpp"
#include "a2p/training.hpp"
#include "a2p/unlearning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

/// Thrown for bad flag values found after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config_file;
  std::string registry;
  std::string runs = "runs";
  std::string run_id;
};

json load_config(const Common& c) {
  if (c.config_file.empty()) return json::object();
  json j = a2p::io::read_json(c.config_file);
  if (!j.is_object()) throw UsageError(c.config_file + ": config must be a JSON object");
  return j;
}

json section(const json& cfg, const char* name) {
  return cfg.contains(name) ? cfg.at(name) : json::object();
}

fs::path registry_root(const Common& c) {
  return c.registry.empty() ? a2p::Registry::default_root() : fs::path(c.registry);
}

std::string digest(const json& j) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : j.dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf).substr(0, 12);
}

fs::path run_dir(const Common& c, const std::string& command, const json& snapshot) {
  const std::string id = c.run_id.empty() ? command + "-" + digest(snapshot) : c.run_id;
  return fs::path(c.runs) / id;
}

a2p::ImageShape parse_shape(const std::string& s) {
  int c = 0, h = 0, w = 0;
  char x1 = 0, x2 = 0;
  std::istringstream in(s);
  if (!(in >> c >> x1 >> h >> x2 >> w) || x1 != 'x' || x2 != 'x' || !in.eof()) {
    throw UsageError("shape must look like 3x16x16, got '" + s + "'");
  }
  return {c, h, w};
}

/// Training and test splits: a dataset directory when given, otherwise the
/// synthetic desk data described by the zoo config.
a2p::DatasetSplits load_splits(const std::string& data_dir, const a2p::ZooConfig& zoo) {
  if (!data_dir.empty()) return a2p::load_dataset(data_dir);
  return a2p::zoo_data(zoo);
}

/// A registry id or a path to a model file.
a2p::Classifier load_model(const std::string& ref, const a2p::Registry& reg) {
  if (reg.contains(ref)) return reg.load_model(ref);
  if (fs::is_regular_file(ref)) return a2p::Classifier::load(ref);
  throw a2p::InputError("no registry entry or model file named '" + ref + "'");
}

// ---------------------------------------------------------------- dataset

struct DatasetMakeArgs {
  std::string out;
  int classes = 10;
  int train_per_class = 200;
  int test_per_class = 50;
  std::string shape = "3x16x16";
  std::uint64_t seed = 1;
};

int run_dataset_make(const DatasetMakeArgs& a) {
  const auto shape = parse_shape(a.shape);
  a2p::DatasetSplits s{
      a2p::synth_dataset(a.classes, a.train_per_class, shape, a2p::derive_seed(a.seed, "train")),
      a2p::synth_dataset(a.classes, a.test_per_class, shape, a2p::derive_seed(a.seed, "test"))};
  a2p::save_dataset(a.out, s);
  std::cout << "wrote " << s.train.size() << " train and " << s.test.size() << " test images to "
            << a.out << "\n";
  return 0;
}

struct DatasetImportArgs {
  std::string out;
  std::string train;
  std::string test;
};

int run_dataset_import(const DatasetImportArgs& a) {
  a2p::DatasetSplits s{a2p::load_cifar10_binary(a.train), a2p::load_cifar10_binary(a.test)};
  s.train.name = s.test.name = "cifar10";
  a2p::save_dataset(a.out, s);
  std::cout << "imported " << s.train.size() << " train and " << s.test.size() << " test images to "
            << a.out << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
  Common common;
  std::string id;
  std::string data;
  std::string attack = "clean";
  std::optional<int> target;
  std::optional<int> side;
  std::optional<std::string> location;
  std::optional<double> blend;
  std::string blend_convention = "mixing_weight";
  std::optional<double> rate;
  std::optional<std::string> arch;
  std::optional<int> epochs;
  std::optional<double> lr;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  const json cfg = load_config(a.common);
  a2p::ZooConfig zoo = a2p::zoo_config_from_json(section(cfg, "zoo"));
  a2p::TrainConfig tc = cfg.contains("train") ? a2p::train_config_from_json(cfg.at("train")) : zoo.train;
  if (a.arch) tc.arch = a2p::parse_architecture(*a.arch);
  if (a.epochs) tc.epochs = *a.epochs;
  if (a.lr) tc.sgd.learning_rate = *a.lr;

  const a2p::DatasetSplits data = load_splits(a.data, zoo);
  std::optional<a2p::PoisonPlan> plan;
  if (a.attack != "clean") {
    a2p::PoisonPlan p;
    p.poison_rate = a.rate.value_or(zoo.poison_rate);
    auto& t = p.trigger;
    if (a.attack == "blend") {
      const auto conv = a.blend_convention == "transparency" ? a2p::BlendConvention::kTransparency
                                                             : a2p::BlendConvention::kMixingWeight;
      t = a2p::blend_trigger(a.blend.value_or(conv == a2p::BlendConvention::kTransparency ? 0.8 : 0.2),
                             conv, 0, a2p::derive_seed(a.seed, "pattern"));
    } else {
      t.kind = a2p::parse_trigger_kind(a.attack);
      t.pattern_seed = a2p::derive_seed(a.seed, "pattern");
      if (t.kind == a2p::TriggerKind::kMultiPatch) {
        t.locations = {a2p::Location::kTopLeft, a2p::Location::kTopRight, a2p::Location::kBottomRight,
                       a2p::Location::kBottomLeft};
      }
    }
    if (a.side) t.side = *a.side;
    if (a.location) t.location = a2p::parse_location(*a.location);
    t.target_label = a.target.value_or(0);
    t.validate(data.train.data.shape);
    plan = p;
  } else if (a.target || a.side || a.location || a.blend || a.rate) {
    throw UsageError("trigger flags need --attack other than clean");
  }

  a2p::Registry reg(registry_root(a.common));
  if (reg.contains(a.id)) throw a2p::InputError("registry already holds '" + a.id + "'");
  a2p::TrainedModel t = a2p::train_model(data.train, data.test, tc, plan, a.seed);
  reg.add(a.id, t.model, t.report);
  std::cout << a.id << ": clean_accuracy=" << t.report.clean_accuracy;
  if (t.report.asr_b) std::cout << " asr_b=" << *t.report.asr_b;
  std::cout << "\n";
  return 0;
}

// ---------------------------------------------------------------- detect

struct DetectArgs {
  Common common;
  std::string model;
  std::string data;
  std::optional<double> tau;
  std::optional<std::string> strategy;
  std::optional<std::string> region_strategy;
  std::optional<double> alpha;
  std::optional<double> stop_fraction;
  std::optional<int> samples_per_class;
  std::optional<std::uint64_t> seed;
};

a2p::DetectionConfig resolve_detection(const json& cfg, const DetectArgs& a) {
  a2p::DetectionConfig d = a2p::detection_config_from_json(section(cfg, "detection"));
  if (a.tau) d.tau = *a.tau;
  if (a.strategy) d.scheduler.strategy = a2p::parse_budget_strategy(*a.strategy);
  if (a.region_strategy) d.region_strategy = a2p::parse_region_strategy(*a.region_strategy);
  if (a.alpha) d.regions.alpha = *a.alpha;
  if (a.stop_fraction) d.regions.stop_fraction = *a.stop_fraction;
  if (a.samples_per_class) d.samples_per_class = *a.samples_per_class;
  if (a.seed) d.seed = *a.seed;
  d.validate();
  return d;
}

int run_detect(const DetectArgs& a) {
  const json cfg = load_config(a.common);
  const a2p::DetectionConfig d = resolve_detection(cfg, a);
  const a2p::ZooConfig zoo = a2p::zoo_config_from_json(section(cfg, "zoo"));
  a2p::Registry reg(registry_root(a.common));
  const a2p::Classifier model = load_model(a.model, reg);
  const a2p::DatasetSplits data = load_splits(a.data, zoo);
  const a2p::ImageBatch probe =
      a2p::sample_per_class(data.test, d.samples_per_class, a2p::derive_seed(d.seed, "probe-set"));

  json snapshot = {{"command", "detect"},
                   {"model", a.model},
                   {"data", a.data.empty() ? json(a2p::to_json(zoo)) : json(a.data)},
                   {"detection", a2p::to_json(d)}};
  const fs::path dir = run_dir(a.common, "detect", snapshot);
  fs::create_directories(dir);
  a2p::io::write_json(dir / "config.json", snapshot);

  const a2p::DetectionRun run = a2p::detect(model, probe, d);
  a2p::io::write_json(dir / "report.json", a2p::to_json(run.report));
  run.archive.save(dir / "probes");
  a2p::io::write_json(dir / "timing.json", {{"wall_time_seconds", run.report.wall_time_seconds}});

  if (run.report.infected) {
    std::cout << "INFECTED " << *run.report.suspected_target << "\n";
  } else {
    std::cout << "CLEAN\n";
  }
  std::cout << "max anomaly index " << run.report.max_anomaly_index() << ", report "
            << (dir / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- bench

struct BenchArgs {
  Common common;
  std::string sweep;
  std::optional<int> workers;
  std::optional<int> models_per_kind;
  bool no_train = false;
};

int run_bench(const BenchArgs& a) {
  const json cfg = load_config(a.common);
  json bj = section(cfg, "bench");
  if (cfg.contains("zoo")) bj["zoo"] = cfg.at("zoo");
  if (cfg.contains("detection")) bj["detection"] = cfg.at("detection");
  a2p::BenchConfig c = a2p::bench_config_from_json(bj);
  if (a.workers) c.workers = *a.workers;
  if (a.models_per_kind) c.zoo.models_per_kind = *a.models_per_kind;
  if (a.no_train) c.train_missing = false;
  c.validate();
  const auto kind = a2p::parse_sweep_kind(a.sweep);

  json snapshot = a2p::to_json(c);
  snapshot["sweep"] = a.sweep;
  snapshot.erase("workers");
  const fs::path dir = run_dir(a.common, "bench-" + a.sweep, snapshot);
  a2p::Registry reg(registry_root(a.common));
  const a2p::SweepOutput out = a2p::run_sweep(kind, c, reg, dir);
  for (const auto& r : out.results) {
    std::cout << r.point << ": models=" << r.rows.size();
    if (r.acc) std::cout << " acc=" << *r.acc;
    if (r.auroc) std::cout << " auroc=" << *r.auroc;
    if (r.false_positive_rate) std::cout << " fpr=" << *r.false_positive_rate;
    std::cout << " pgd_calls=" << r.pgd_calls << "\n";
  }
  for (const auto& m : out.missing) std::cout << "missing: " << m << "\n";
  std::cout << "results: " << (dir / "results.csv").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- unlearn

struct UnlearnArgs {
  Common common;
  std::string model;
  std::string mode;
  std::string archive;
  std::string data;
  std::string out_id;
  std::optional<std::uint64_t> seed;
};

int run_unlearn(const UnlearnArgs& a) {
  const json cfg = load_config(a.common);
  a2p::UnlearnConfig uc = a2p::unlearn_config_from_json(section(cfg, "unlearn"));
  const a2p::ZooConfig zoo = a2p::zoo_config_from_json(section(cfg, "zoo"));
  if (!section(cfg, "unlearn").contains("learning_rate")) uc.sgd = zoo.train.sgd;
  if (a.seed) uc.seed = *a.seed;
  const auto mode = a2p::parse_unlearn_mode(a.mode);

  a2p::Registry reg(registry_root(a.common));
  const a2p::Classifier model = load_model(a.model, reg);
  std::optional<a2p::TriggerSpec> trigger;
  if (reg.contains(a.model)) trigger = reg.load_report(a.model).trigger;
  std::optional<a2p::ProbeArchive> archive;
  if (!a.archive.empty()) archive = a2p::ProbeArchive::load(a.archive);
  const a2p::DatasetSplits data = load_splits(a.data, zoo);

  json snapshot = {{"command", "unlearn"},
                   {"model", a.model},
                   {"mode", a.mode},
                   {"archive", a.archive},
                   {"data", a.data.empty() ? json(a2p::to_json(zoo)) : json(a.data)},
                   {"unlearn", a2p::to_json(uc)}};
  const fs::path dir = run_dir(a.common, "unlearn", snapshot);
  fs::create_directories(dir);
  a2p::io::write_json(dir / "config.json", snapshot);

  const a2p::UnlearnResult r = a2p::unlearn(model, data.train, data.test,
                                            archive ? &*archive : nullptr,
                                            trigger ? &*trigger : nullptr, mode, uc);
  a2p::io::write_json(dir / "report.json", a2p::to_json(r.report));
  if (!a.out_id.empty()) {
    a2p::TrainReport tr = reg.load_report(a.model);
    tr.clean_accuracy = r.report.after.clean_accuracy;
    tr.asr_b = r.report.after.asr_b;
    reg.add(a.out_id, r.model, tr);
  }
  auto show = [](const a2p::Evaluation& e) {
    std::ostringstream s;
    s << "clean_accuracy=" << e.clean_accuracy;
    if (e.asr_b) s << " asr_b=" << *e.asr_b;
    return s.str();
  };
  std::cout << "before: " << show(r.report.before) << "\nafter:  " << show(r.report.after)
            << "\nreport: " << (dir / "report.json").string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- report

std::string cell(const json& v) {
  if (v.is_null()) return "-";
  if (v.is_number_float()) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v.get<double>());
    return buf;
  }
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

int run_report(const std::string& dir_arg) {
  const fs::path dir(dir_arg);
  if (!fs::is_directory(dir)) throw a2p::InputError(dir_arg + " is not a directory");
  std::ostringstream text;
  if (fs::exists(dir / "summary.json")) {
    const json s = a2p::io::read_json(dir / "summary.json");
    text << "sweep " << cell(s.at("sweep")) << "\n";
    const std::vector<std::string> cols{"point", "models", "acc", "auroc", "false_positive_rate",
                                        "target_accuracy", "pgd_calls"};
    std::string plot = "point,acc,auroc,false_positive_rate,target_accuracy,pgd_calls\n";
    for (const auto& c : cols) text << c << (c == cols.back() ? "\n" : "\t");
    for (const auto& r : s.at("results")) {
      for (const auto& c : cols) text << cell(r.at(c)) << (c == cols.back() ? "\n" : "\t");
      plot += cell(r.at("point")) + "," + cell(r.at("acc")) + "," + cell(r.at("auroc")) + "," +
              cell(r.at("false_positive_rate")) + "," + cell(r.at("target_accuracy")) + "," +
              cell(r.at("pgd_calls")) + "\n";
    }
    a2p::io::write_file_atomic(dir / "plot_points.csv", plot);
    for (const auto& m : s.at("missing")) text << "missing " << m.get<std::string>() << "\n";
  } else if (fs::exists(dir / "report.json")) {
    const json r = a2p::io::read_json(dir / "report.json");
    if (r.contains("trace")) {
      text << "verdict " << cell(r.at("verdict")) << " suspected_target " << cell(r.at("suspected_target"))
           << "\nstage\tregion\tbudget\tasr_a\tattempts\tmax_index\targmax_class\n";
      std::string plot = "stage,region_size,budget,asr_a,max_index\n";
      for (const auto& t : r.at("trace")) {
        text << cell(t.at("stage")) << "\t" << cell(t.at("region_size")) << "\t" << cell(t.at("budget"))
             << "\t" << cell(t.at("asr_a")) << "\t" << cell(t.at("attempts")) << "\t"
             << cell(t.at("max_index")) << "\t" << cell(t.at("argmax_class")) << "\n";
        plot += cell(t.at("stage")) + "," + cell(t.at("region_size")) + "," + cell(t.at("budget")) + "," +
                cell(t.at("asr_a")) + "," + cell(t.at("max_index")) + "\n";
      }
      a2p::io::write_file_atomic(dir / "plot_trace.csv", plot);
    } else {
      text << a2p::io::dump(r);
    }
  } else {
    throw a2p::InputError(dir_arg + " has neither summary.json nor report.json");
  }
  if (fs::exists(dir / "grid.csv")) {
    // Mean max anomaly index per (attack family, side, budget), as a pivot for plotting.
    std::istringstream in(a2p::io::read_file(dir / "grid.csv"));
    std::string line;
    std::getline(in, line);
    std::map<std::tuple<std::string, int, double>, std::pair<double, int>> acc;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string x; std::getline(ls, x, ',');) f.push_back(x);
      if (f.size() < 8) continue;
      const std::string family = f[1].substr(0, f[1].find('-'));
      auto& slot = acc[{family, std::stoi(f[4]), std::stod(f[5])}];
      slot.first += std::stod(f[7]);
      slot.second += 1;
    }
    std::string plot = "family,region_side,budget_255,mean_max_index\n";
    for (const auto& [k, v] : acc) {
      char buf[128];
      std::snprintf(buf, sizeof buf, "%s,%d,%g,%.6g\n", std::get<0>(k).c_str(), std::get<1>(k),
                    std::get<2>(k) * 255.0, v.first / v.second);
      plot += buf;
    }
    a2p::io::write_file_atomic(dir / "plot_grid.csv", plot);
    text << "grid plot data: " << (dir / "plot_grid.csv").string() << "\n";
  }
  std::cout << text.str();
  a2p::io::write_file_atomic(dir / "report.txt", text.str());
  return 0;
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_file, "JSON config with zoo/train/detection/bench/unlearn sections");
  cmd->add_option("--registry", c.registry, std::string("Registry root (default $") + a2p::kRegistryEnv +
                                                " or ./registry)");
  cmd->add_option("--runs", c.runs, "Runs directory")->capture_default_str();
  cmd->add_option("--run-id", c.run_id, "Run directory name (default: command + config digest)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"a2p: backdoor detection by adaptive adversarial probing"};
  app.require_subcommand(1);

  auto* dataset = app.add_subcommand("dataset", "Create or import datasets");
  dataset->require_subcommand(1);
  DatasetMakeArgs make;
  auto* make_cmd = dataset->add_subcommand("make", "Write a synthetic desk dataset");
  make_cmd->add_option("--out", make.out, "Output directory")->required();
  make_cmd->add_option("--classes", make.classes)->capture_default_str();
  make_cmd->add_option("--train-per-class", make.train_per_class)->capture_default_str();
  make_cmd->add_option("--test-per-class", make.test_per_class)->capture_default_str();
  make_cmd->add_option("--shape", make.shape, "CxHxW")->capture_default_str();
  make_cmd->add_option("--seed", make.seed)->capture_default_str();
  DatasetImportArgs imp;
  auto* import_cmd = dataset->add_subcommand("import", "Import CIFAR-10 binary batches");
  import_cmd->add_option("--out", imp.out, "Output directory")->required();
  import_cmd->add_option("--train", imp.train, "data_batch file or directory")->required();
  import_cmd->add_option("--test", imp.test, "test_batch.bin")->required();

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "Train a clean or infected model into the registry");
  add_common(train, tr.common);
  train->add_option("--id", tr.id, "Registry id")->required();
  train->add_option("--data", tr.data, "Dataset directory (default: synthetic desk data)");
  train->add_option("--attack", tr.attack, "Attack kind")
      ->check(CLI::IsMember({"clean", "patch", "blend", "warp", "per_sample_patch", "multi_patch"}))
      ->capture_default_str();
  train->add_option("--target", tr.target, "Target label");
  train->add_option("--side", tr.side, "Patch side");
  train->add_option("--location", tr.location, "Patch corner")
      ->check(CLI::IsMember({"TL", "TR", "BR", "BL", "C"}));
  train->add_option("--blend", tr.blend, "Blend value");
  train->add_option("--blend-convention", tr.blend_convention, "mixing_weight|transparency")
      ->check(CLI::IsMember({"mixing_weight", "transparency"}))
      ->capture_default_str();
  train->add_option("--rate", tr.rate, "Poison rate");
  train->add_option("--arch", tr.arch, "Architecture")
      ->check(CLI::IsMember({"small_cnn", "mlp", "linear"}));
  train->add_option("--epochs", tr.epochs);
  train->add_option("--lr", tr.lr);
  train->add_option("--seed", tr.seed)->capture_default_str();

  DetectArgs de;
  auto* detect = app.add_subcommand("detect", "Run A2P detection on a model");
  add_common(detect, de.common);
  detect->add_option("model", de.model, "Registry id or model file")->required();
  detect->add_option("--data", de.data, "Dataset directory (default: synthetic desk data)");
  detect->add_option("--tau", de.tau, "Anomaly threshold (default 3.5)");
  detect->add_option("--strategy", de.strategy, "Budget strategy")
      ->check(CLI::IsMember({"feedback", "cumulative", "exponential", "binary_search"}));
  detect->add_option("--region-strategy", de.region_strategy, "Region strategy")
      ->check(CLI::IsMember({"attention", "random"}));
  detect->add_option("--alpha", de.alpha, "Region shrink factor");
  detect->add_option("--stop-fraction", de.stop_fraction, "Smallest region as a fraction of the image");
  detect->add_option("--samples-per-class", de.samples_per_class);
  detect->add_option("--seed", de.seed);

  BenchArgs be;
  auto* bench = app.add_subcommand("bench", "Run a benchmark sweep");
  add_common(bench, be.common);
  std::vector<std::string> sweeps;
  for (auto k : a2p::all_sweep_kinds()) sweeps.push_back(a2p::to_string(k));
  bench->add_option("sweep", be.sweep, "Sweep name")->required()->check(CLI::IsMember(sweeps));
  bench->add_option("--workers", be.workers);
  bench->add_option("--models-per-kind", be.models_per_kind);
  bench->add_flag("--no-train", be.no_train, "Skip zoo members missing from the registry");

  UnlearnArgs un;
  auto* unlearn = app.add_subcommand("unlearn", "Fine-tune a model to remove its backdoor");
  add_common(unlearn, un.common);
  unlearn->add_option("model", un.model, "Registry id or model file")->required();
  unlearn->add_option("--mode", un.mode, "reversed_trigger|original_trigger|random_noise|no_patching")
      ->required()
      ->check(CLI::IsMember({"reversed_trigger", "original_trigger", "random_noise", "no_patching"}));
  unlearn->add_option("--archive", un.archive, "Probe archive directory from a detect run");
  unlearn->add_option("--data", un.data, "Dataset directory (default: synthetic desk data)");
  unlearn->add_option("--out-id", un.out_id, "Register the fine-tuned model under this id");
  unlearn->add_option("--seed", un.seed);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "Summarise a run directory");
  report->add_option("dir", report_dir, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*make_cmd) return run_dataset_make(make);
    if (*import_cmd) return run_dataset_import(imp);
    if (*train) return run_train(tr);
    if (*detect) return run_detect(de);
    if (*bench) return run_bench(be);
    if (*unlearn) return run_unlearn(un);
    if (*report) return run_report(report_dir);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
