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

#include "a2p/detection.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "a2p/io.hpp"
#include "a2p/outlier.hpp"
#include "a2p/rng.hpp"

namespace a2p {

std::string to_string(RegionStrategy strategy) {
  return strategy == RegionStrategy::kAttention ? "attention" : "random";
}

RegionStrategy parse_region_strategy(std::string_view name) {
  if (name == "attention") return RegionStrategy::kAttention;
  if (name == "random") return RegionStrategy::kRandom;
  throw InputError("unknown region strategy '" + std::string(name) + "'");
}

void DetectionConfig::validate() const {
  regions.validate();
  scheduler.validate();
  probe.validate();
  if (samples_per_class < 1) throw InputError("samples per class must be >= 1");
  if (std::isnan(tau)) throw InputError("tau must be a number");
}

nlohmann::json to_json(const DetectionConfig& c) {
  const auto& s = c.scheduler;
  return {
      {"regions",
       {{"alpha", c.regions.alpha},
        {"stop_fraction", c.regions.stop_fraction},
        {"strategy", to_string(c.region_strategy)},
        {"nested", c.nested_regions}}},
      {"scheduler",
       {{"strategy", to_string(s.strategy)},
        {"initial_budget", s.initial_budget},
        {"feedback_gain", s.feedback_gain},
        {"margin", s.margin},
        {"lambda", s.lambda},
        {"max_attempts", s.max_attempts},
        {"cumulative_step", s.cumulative_step},
        {"increment_max_attempts", s.increment_max_attempts},
        {"search_step", s.search_step},
        {"bisection_rounds", s.bisection_rounds},
        {"min_initial_asr", s.min_initial_asr},
        {"min_budget", s.min_budget},
        {"max_budget", s.max_budget}}},
      {"probe",
       {{"steps", c.probe.steps},
        {"step_size", c.probe.step_size},
        {"random_start", c.probe.random_start},
        {"step_rule", c.probe.step_rule == StepRule::kFixed ? "fixed" : "budget_scaled"},
        {"budget_step_fraction", c.probe.budget_step_fraction},
        {"seed", c.probe.seed}}},
      {"tau", io::number(c.tau)},
      {"samples_per_class", c.samples_per_class},
      {"seed", c.seed},
  };
}

DetectionConfig detection_config_from_json(const nlohmann::json& j) {
  DetectionConfig c;
  try {
    if (j.contains("regions")) {
      const auto& r = j.at("regions");
      c.regions.alpha = r.value("alpha", c.regions.alpha);
      c.regions.stop_fraction = r.value("stop_fraction", c.regions.stop_fraction);
      if (r.contains("strategy")) {
        c.region_strategy = parse_region_strategy(r.at("strategy").get<std::string>());
      }
      c.nested_regions = r.value("nested", c.nested_regions);
    }
    if (j.contains("scheduler")) {
      const auto& s = j.at("scheduler");
      auto& o = c.scheduler;
      if (s.contains("strategy")) o.strategy = parse_budget_strategy(s.at("strategy").get<std::string>());
      o.initial_budget = s.value("initial_budget", o.initial_budget);
      o.feedback_gain = s.value("feedback_gain", o.feedback_gain);
      o.margin = s.value("margin", o.margin);
      o.lambda = s.value("lambda", o.lambda);
      o.max_attempts = s.value("max_attempts", o.max_attempts);
      o.cumulative_step = s.value("cumulative_step", o.cumulative_step);
      o.increment_max_attempts = s.value("increment_max_attempts", o.increment_max_attempts);
      o.search_step = s.value("search_step", o.search_step);
      o.bisection_rounds = s.value("bisection_rounds", o.bisection_rounds);
      o.min_initial_asr = s.value("min_initial_asr", o.min_initial_asr);
      o.min_budget = s.value("min_budget", o.min_budget);
      o.max_budget = s.value("max_budget", o.max_budget);
    }
    if (j.contains("probe")) {
      const auto& p = j.at("probe");
      c.probe.steps = p.value("steps", c.probe.steps);
      c.probe.step_size = p.value("step_size", c.probe.step_size);
      c.probe.random_start = p.value("random_start", c.probe.random_start);
      if (p.contains("step_rule")) {
        const auto rule = p.at("step_rule").get<std::string>();
        if (rule == "fixed") {
          c.probe.step_rule = StepRule::kFixed;
        } else if (rule == "budget_scaled") {
          c.probe.step_rule = StepRule::kBudgetScaled;
        } else {
          throw InputError("unknown step rule '" + rule + "'");
        }
      }
      c.probe.budget_step_fraction = p.value("budget_step_fraction", c.probe.budget_step_fraction);
      c.probe.seed = p.value("seed", c.probe.seed);
    }
    if (j.contains("tau")) c.tau = io::to_double(j.at("tau"));
    c.samples_per_class = j.value("samples_per_class", c.samples_per_class);
    c.seed = j.value("seed", c.seed);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad detection config: ") + e.what());
  }
  return c;
}

double DetectionReport::max_anomaly_index() const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& t : trace) m = std::max(m, t.max_index);
  return m;
}

nlohmann::json to_json(const DetectionReport& r, bool include_timing) {
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& t : r.trace) {
    nlohmann::json idx = nlohmann::json::array();
    for (double v : t.indices) idx.push_back(io::number(v));
    trace.push_back({
        {"stage", t.stage},
        {"region_size", t.region_size},
        {"budget", t.budget},
        {"asr_a", t.asr_a},
        {"attempts", t.attempts},
        {"max_index", io::number(t.max_index)},
        {"argmax_class", t.argmax_class},
        {"scores", t.scores},
        {"indices", idx},
    });
  }
  nlohmann::json j = {
      {"verdict", r.infected ? "infected" : "clean"},
      {"suspected_target",
       r.suspected_target ? nlohmann::json(*r.suspected_target) : nlohmann::json(nullptr)},
      {"stopping_stage",
       r.stopping_stage ? nlohmann::json(*r.stopping_stage) : nlohmann::json(nullptr)},
      {"beta", r.beta},
      {"max_anomaly_index", io::number(r.max_anomaly_index())},
      {"pgd_calls", r.pgd_calls},
      {"planned_stages", r.planned_stages},
      {"trace", trace},
      {"diagnostics", r.diagnostics},
      {"config", to_json(r.config)},
  };
  if (include_timing) j["wall_time_seconds"] = r.wall_time_seconds;
  return j;
}

DetectionReport detection_report_from_json(const nlohmann::json& j) {
  DetectionReport r;
  r.infected = j.at("verdict").get<std::string>() == "infected";
  if (!j.at("suspected_target").is_null()) r.suspected_target = j.at("suspected_target").get<int>();
  if (!j.at("stopping_stage").is_null()) r.stopping_stage = j.at("stopping_stage").get<int>();
  r.beta = j.at("beta").get<double>();
  r.pgd_calls = j.at("pgd_calls").get<int>();
  r.planned_stages = j.at("planned_stages").get<std::size_t>();
  for (const auto& t : j.at("trace")) {
    StageTrace s;
    s.stage = t.at("stage").get<int>();
    s.region_size = t.at("region_size").get<std::size_t>();
    s.budget = t.at("budget").get<double>();
    s.asr_a = t.at("asr_a").get<double>();
    s.attempts = t.at("attempts").get<int>();
    s.max_index = io::to_double(t.at("max_index"));
    s.argmax_class = t.at("argmax_class").get<int>();
    s.scores = t.at("scores").get<std::vector<double>>();
    for (const auto& v : t.at("indices")) s.indices.push_back(io::to_double(v));
    r.trace.push_back(std::move(s));
  }
  r.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
  r.config = detection_config_from_json(j.at("config"));
  if (j.contains("wall_time_seconds")) r.wall_time_seconds = j.at("wall_time_seconds").get<double>();
  return r;
}

void ProbeArchive::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  const ImageShape s = images.shape;
  nlohmann::json manifest = {
      {"stage", stage},
      {"budget", budget},
      {"count", images.size()},
      {"shape", {s.channels, s.height, s.width}},
  };
  std::string x, p, y;
  io::append_f64(x, images.pixels);
  io::append_f64(p, probes);
  io::append_i32(y, images.labels);
  io::write_file_atomic(dir / "images.f64", x);
  io::write_file_atomic(dir / "probes.f64", p);
  io::write_file_atomic(dir / "labels.i32", y);
  io::write_json(dir / "manifest.json", manifest);
}

ProbeArchive ProbeArchive::load(const std::filesystem::path& dir) {
  const auto manifest = io::read_json(dir / "manifest.json");
  ProbeArchive a;
  try {
    a.stage = manifest.at("stage").get<int>();
    a.budget = manifest.at("budget").get<double>();
    const auto n = manifest.at("count").get<std::size_t>();
    const auto dims = manifest.at("shape").get<std::vector<int>>();
    if (dims.size() != 3) throw FormatError("probe archive field 'shape' needs 3 dims");
    a.images.shape = {dims[0], dims[1], dims[2]};
    const std::size_t total = n * a.images.shape.size();
    const std::string xb = io::read_file(dir / "images.f64");
    io::Reader xr(xb);
    a.images.pixels = xr.f64(total, "images");
    const std::string pb = io::read_file(dir / "probes.f64");
    io::Reader pr(pb);
    a.probes = pr.f64(total, "probes");
    const std::string yb = io::read_file(dir / "labels.i32");
    io::Reader yr(yb);
    a.images.labels = yr.i32(n, "labels");
    if (xr.remaining() || pr.remaining() || yr.remaining()) {
      throw FormatError(dir.string() + ": probe archive has trailing bytes");
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(dir.string() + ": malformed probe archive manifest: " + e.what());
  }
  return a;
}

namespace {

struct StageOutcome {
  ProbeState state;
  int attempts = 0;
};

StageOutcome schedule_stage(const Classifier& model, const ImageBatch& batch,
                            const RegionMasks& regions, double carried,
                            const BoundaryState& boundary, const DetectionConfig& config) {
  const SchedulerConfig& sc = config.scheduler;
  StageOutcome out;
  switch (sc.strategy) {
    case BudgetStrategy::kFeedback: {
      double eps = sc.clamp(carried);
      while (true) {
        out.state = masked_pgd(model, batch, regions, eps, config.probe);
        ++out.attempts;
        if (std::abs(out.state.asr_a - boundary.beta) <= sc.margin) break;
        if (out.attempts >= sc.max_attempts) break;
        const double next = next_budget(eps, out.state.asr_a, boundary, sc);
        if (next == eps) break;  // pinned at a bound
        eps = next;
      }
      break;
    }
    case BudgetStrategy::kCumulative:
    case BudgetStrategy::kExponential: {
      double eps = sc.clamp(carried);
      while (true) {
        out.state = masked_pgd(model, batch, regions, eps, config.probe);
        ++out.attempts;
        if (out.state.asr_a >= boundary.beta - sc.margin) break;
        if (out.attempts >= sc.increment_max_attempts || eps >= sc.max_budget) break;
        eps = increment_budget(eps, sc);
      }
      break;
    }
    case BudgetStrategy::kBinarySearch: {
      auto r = binary_search_budget(model, batch, regions, carried, boundary, sc, config.probe);
      out.state = std::move(r.state);
      out.attempts = r.search.evaluations;
      break;
    }
  }
  return out;
}

bool all_zero(const GradientBatch& g) {
  return std::all_of(g.values.begin(), g.values.end(), [](double v) { return v == 0.0; });
}

}  // namespace

DetectionRun detect(const Classifier& model, const ImageBatch& probe_set,
                    const DetectionConfig& config) {
  const auto t0 = std::chrono::steady_clock::now();
  config.validate();
  probe_set.validate(model.num_classes());
  if (probe_set.shape != model.input_shape()) {
    throw InputError("probe set shape does not match the model input");
  }
  {
    std::vector<int> per_class(static_cast<std::size_t>(model.num_classes()), 0);
    for (int y : probe_set.labels) ++per_class[static_cast<std::size_t>(y)];
    for (int c = 0; c < model.num_classes(); ++c) {
      if (per_class[static_cast<std::size_t>(c)] == 0) {
        throw InputError("probe set has no sample of class " + std::to_string(c));
      }
    }
  }

  DetectionRun run;
  DetectionReport& rep = run.report;
  rep.config = config;
  const ImageShape shape = probe_set.shape;
  const auto plan = stage_plan(shape, config.regions);
  rep.planned_stages = plan.size();

  auto finish_stage = [&](int stage, const ProbeState& state, int attempts) {
    const ClassScores cs = class_scores(model, probe_set, state.probes);
    const AnomalyResult an = mad_anomaly(cs.scores, config.tau);
    for (const auto& w : cs.warnings) rep.diagnostics.push_back("stage " + std::to_string(stage) + ": " + w);
    rep.trace.push_back({stage, state.regions.common_cardinality(), state.budget, state.asr_a,
                         attempts, an.max_index, an.argmax_class, cs.scores, an.indices});
    run.archive.stage = stage;
    run.archive.budget = state.budget;
    run.archive.probes = state.probes;
    if (an.infected) {
      rep.infected = true;
      rep.suspected_target = an.argmax_class;
      rep.stopping_stage = stage;
    }
    return an.infected;
  };

  run.archive.images = probe_set;
  BoundaryResult boundary = initial_boundary(model, probe_set, config.scheduler, config.probe);
  rep.beta = boundary.state.beta;
  rep.pgd_calls += boundary.state.history.front().attempts;
  for (const auto& w : boundary.state.warnings) rep.diagnostics.push_back(w);

  ProbeState prev = std::move(boundary.stage0);
  bool stop = finish_stage(0, prev, boundary.state.history.front().attempts);

  if (!stop && boundary.state.degenerate) {
    if (all_zero(model.input_gradient(probe_set))) {
      rep.diagnostics.push_back("degenerate boundary with zero input gradient: stopping as clean");
      stop = true;
    }
  }

  for (std::size_t stage = 1; !stop && stage < plan.size(); ++stage) {
    RegionMasks regions;
    try {
      if (config.region_strategy == RegionStrategy::kAttention) {
        const ImageBatch probed = probed_batch(probe_set, prev.probes);
        regions = attention_region(model.input_gradient(probed), prev.regions,
                                   config.regions.alpha, config.nested_regions);
      } else {
        regions = random_region(prev.regions, config.regions.alpha,
                                derive_seed(config.seed, "region", stage));
      }
    } catch (const ScheduleExhausted&) {
      break;
    }
    StageOutcome outcome =
        schedule_stage(model, probe_set, regions, prev.budget, boundary.state, config);
    rep.pgd_calls += outcome.attempts;
    boundary.state.history.push_back({outcome.state.budget, outcome.state.asr_a, outcome.attempts});
    stop = finish_stage(static_cast<int>(stage), outcome.state, outcome.attempts);
    prev = std::move(outcome.state);
  }

  rep.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

}  // namespace a2p
