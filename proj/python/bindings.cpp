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
#include <string>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "a2p/benchmark.hpp"
#include "a2p/data.hpp"
#include "a2p/detection.hpp"
#include "a2p/io.hpp"
#include "a2p/outlier.hpp"
#include "a2p/probe.hpp"
#include "a2p/region.hpp"
#include "a2p/registry.hpp"
#include "a2p/training.hpp"
#include "a2p/trigger.hpp"

namespace py = pybind11;
using namespace a2p;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using Labels = py::array_t<int, py::array::c_style | py::array::forcecast>;

ImageBatch to_batch(const Array& images, const Labels& labels) {
  if (images.ndim() != 4) throw InputError("images must have shape (N, C, H, W)");
  if (labels.ndim() != 1 || labels.shape(0) != images.shape(0)) {
    throw InputError("labels must have shape (N,)");
  }
  ImageBatch b({static_cast<int>(images.shape(1)), static_cast<int>(images.shape(2)),
                static_cast<int>(images.shape(3))},
               static_cast<std::size_t>(images.shape(0)));
  std::copy_n(images.data(), b.pixels.size(), b.pixels.begin());
  std::copy_n(labels.data(), b.labels.size(), b.labels.begin());
  return b;
}

Labels zero_labels(const Array& images) {
  Labels out(images.ndim() > 0 ? images.shape(0) : 0);
  std::fill_n(out.mutable_data(), out.size(), 0);
  return out;
}

Array to_array(const std::vector<double>& values, ImageShape shape) {
  const auto n = static_cast<py::ssize_t>(values.size() / std::max<std::size_t>(1, shape.size()));
  Array out({n, static_cast<py::ssize_t>(shape.channels), static_cast<py::ssize_t>(shape.height),
             static_cast<py::ssize_t>(shape.width)});
  std::copy(values.begin(), values.end(), out.mutable_data());
  return out;
}

Labels to_labels(const std::vector<int>& labels) {
  Labels out(static_cast<py::ssize_t>(labels.size()));
  std::copy(labels.begin(), labels.end(), out.mutable_data());
  return out;
}

py::tuple dataset_arrays(const Dataset& d) {
  return py::make_tuple(to_array(d.data.pixels, d.data.shape), to_labels(d.data.labels));
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(io::dump(j));
}

nlohmann::json py_to_json(const py::object& o) {
  if (o.is_none()) return nlohmann::json::object();
  const std::string text = py::str(py::module_::import("json").attr("dumps")(o));
  return nlohmann::json::parse(text);
}

RegionMasks to_masks(const py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>& m) {
  if (m.ndim() != 3) throw InputError("regions must have shape (N, H, W)");
  RegionMasks r(static_cast<std::size_t>(m.shape(0)), static_cast<int>(m.shape(1)),
                static_cast<int>(m.shape(2)));
  std::copy_n(m.data(), r.bits.size(), r.bits.begin());
  return r;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Adversarial-probe backdoor detection";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  m.def(
      "synth_dataset",
      [](int classes, int per_class, std::tuple<int, int, int> shape, std::uint64_t seed) {
        const auto [c, h, w] = shape;
        return dataset_arrays(synth_dataset(classes, per_class, {c, h, w}, seed));
      },
      py::arg("num_classes"), py::arg("per_class"), py::arg("shape"), py::arg("seed"),
      "Returns (images, labels) with images shaped (N, C, H, W).");

  m.def(
      "load_dataset",
      [](const std::filesystem::path& dir) {
        const DatasetSplits s = load_dataset(dir);
        return py::make_tuple(dataset_arrays(s.train), dataset_arrays(s.test));
      },
      py::arg("path"));

  py::class_<Classifier>(m, "Classifier")
      .def(py::init([](const std::string& arch, std::tuple<int, int, int> shape, int classes,
                       std::uint64_t seed) {
             const auto [c, h, w] = shape;
             return Classifier(parse_architecture(arch), {c, h, w}, classes, seed);
           }),
           py::arg("arch"), py::arg("shape"), py::arg("num_classes"), py::arg("seed") = 0)
      .def_static("load", &Classifier::load, py::arg("path"))
      .def("save", &Classifier::save, py::arg("path"))
      .def_property_readonly("architecture",
                             [](const Classifier& c) { return to_string(c.architecture()); })
      .def_property_readonly("num_classes", &Classifier::num_classes)
      .def_property_readonly("input_shape",
                             [](const Classifier& c) {
                               const ImageShape s = c.input_shape();
                               return py::make_tuple(s.channels, s.height, s.width);
                             })
      .def(
          "probabilities",
          [](const Classifier& c, const Array& x) {
            const ImageBatch b = to_batch(x, zero_labels(x));
            const Matrix p = c.forward(b);
            Array out({static_cast<py::ssize_t>(p.rows), static_cast<py::ssize_t>(p.cols)});
            std::copy(p.data.begin(), p.data.end(), out.mutable_data());
            return out;
          },
          py::arg("images"))
      .def(
          "predict",
          [](const Classifier& c, const Array& x) {
            return to_labels(c.predict(to_batch(x, zero_labels(x))));
          },
          py::arg("images"))
      .def(
          "input_gradient",
          [](const Classifier& c, const Array& x, const Labels& y) {
            const ImageBatch b = to_batch(x, y);
            return to_array(c.input_gradient(b).values, b.shape);
          },
          py::arg("images"), py::arg("labels"));

  m.def(
      "masked_pgd",
      [](const Classifier& model, const Array& x, const Labels& y, const py::array_t<std::uint8_t>& regions,
         double budget, int steps, double step_size) {
        ProbeConfig cfg;
        cfg.steps = steps;
        cfg.step_size = step_size;
        const ImageBatch b = to_batch(x, y);
        const ProbeState s = masked_pgd(model, b, to_masks(regions), budget, cfg);
        return py::make_tuple(to_array(s.probes, b.shape), s.asr_a);
      },
      py::arg("model"), py::arg("images"), py::arg("labels"), py::arg("regions"), py::arg("budget"),
      py::arg("steps") = 40, py::arg("step_size") = 0.001,
      "Returns (probes, asr_a).");

  m.def(
      "stage_plan",
      [](std::tuple<int, int, int> shape, double alpha, double stop_fraction) {
        const auto [c, h, w] = shape;
        RegionSchedule s;
        s.alpha = alpha;
        s.stop_fraction = stop_fraction;
        return stage_plan({c, h, w}, s);
      },
      py::arg("shape"), py::arg("alpha") = 0.5, py::arg("stop_fraction") = 0.03);

  m.def(
      "mad_anomaly",
      [](const std::vector<double>& scores, double tau) {
        const AnomalyResult r = mad_anomaly(scores, tau);
        py::dict d;
        d["indices"] = r.indices;
        d["max_index"] = r.max_index;
        d["argmax_class"] = r.argmax_class;
        d["infected"] = r.infected;
        return d;
      },
      py::arg("scores"), py::arg("tau") = 3.5);

  m.def(
      "auroc",
      [](const std::vector<double>& scores, const std::vector<int>& labels) { return auroc(scores, labels); },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "detect",
      [](const Classifier& model, const Array& x, const Labels& y, const py::object& config) {
        const DetectionConfig cfg = detection_config_from_json(py_to_json(config));
        DetectionRun run;
        {
          py::gil_scoped_release release;
          run = detect(model, to_batch(x, y), cfg);
        }
        return json_to_py(to_json(run.report));
      },
      py::arg("model"), py::arg("images"), py::arg("labels"), py::arg("config") = py::none(),
      "Runs the staged detector and returns the report as a dict.");

  m.def(
      "train",
      [](const Array& train_x, const Labels& train_y, const Array& test_x, const Labels& test_y,
         int num_classes, const py::object& config, const py::object& trigger, double poison_rate,
         std::uint64_t seed) {
        Dataset train;
        train.num_classes = num_classes;
        train.data = to_batch(train_x, train_y);
        Dataset test;
        test.num_classes = num_classes;
        test.data = to_batch(test_x, test_y);
        const TrainConfig cfg = train_config_from_json(py_to_json(config));
        std::optional<PoisonPlan> plan;
        if (!trigger.is_none()) {
          plan = PoisonPlan{};
          plan->poison_rate = poison_rate;
          plan->trigger = trigger_from_json(py_to_json(trigger));
        }
        TrainedModel t = [&] {
          py::gil_scoped_release release;
          return train_model(train, test, cfg, plan, seed);
        }();
        return py::make_tuple(std::move(t.model), json_to_py(to_json(t.report)));
      },
      py::arg("train_images"), py::arg("train_labels"), py::arg("test_images"), py::arg("test_labels"),
      py::arg("num_classes"), py::arg("config") = py::none(), py::arg("trigger") = py::none(),
      py::arg("poison_rate") = 0.1, py::arg("seed") = 0,
      "Trains a model, poisoned when a trigger dict is given. Returns (model, report).");

  m.def(
      "load_registry_model",
      [](const std::filesystem::path& root, const std::string& id) { return Registry(root).load_model(id); },
      py::arg("root"), py::arg("model_id"));
}
