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

#include "a2p/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "a2p/io.hpp"
#include "a2p/rng.hpp"

namespace a2p {

using detail::Layer;
using detail::LayerKind;

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::kSmallCnn: return "small_cnn";
    case Architecture::kMlp: return "mlp";
    case Architecture::kLinear: return "linear";
  }
  return "unknown";
}

Architecture parse_architecture(std::string_view name) {
  if (name == "small_cnn") return Architecture::kSmallCnn;
  if (name == "mlp") return Architecture::kMlp;
  if (name == "linear") return Architecture::kLinear;
  throw InputError("unknown architecture '" + std::string(name) + "'");
}

namespace {

constexpr int kConv1Channels = 8;
constexpr int kConv2Channels = 16;
constexpr int kCnnHidden = 64;
constexpr int kMlpHidden1 = 128;
constexpr int kMlpHidden2 = 64;

constexpr char kMagic[8] = {'A', '2', 'P', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kFormatVersion = 1;

struct ParamSpec {
  std::string name;
  std::vector<int> dims;
  int fan_in;
};

// Layer plan plus the parameter tensors it needs, in file order.
struct Plan {
  std::vector<Layer> layers;
  std::vector<ParamSpec> params;
};

Plan make_plan(Architecture arch, ImageShape shape, int k) {
  Plan plan;
  int c = shape.channels, h = shape.height, w = shape.width;
  auto add_param = [&](std::string name, std::vector<int> dims, int fan_in) {
    plan.params.push_back({std::move(name), std::move(dims), fan_in});
    return static_cast<int>(plan.params.size() - 1);
  };
  auto conv = [&](const std::string& name, int out) {
    Layer l{LayerKind::kConv3x3, name, c, h, w, out, h, w};
    l.weight = add_param(name + ".weight", {out, c, 3, 3}, c * 9);
    l.bias = add_param(name + ".bias", {out}, c * 9);
    plan.layers.push_back(l);
    c = out;
  };
  auto relu = [&] { plan.layers.push_back({LayerKind::kRelu, "relu", c, h, w, c, h, w}); };
  auto pool = [&] {
    plan.layers.push_back({LayerKind::kMaxPool2, "pool", c, h, w, c, h / 2, w / 2});
    h /= 2;
    w /= 2;
  };
  auto dense = [&](const std::string& name, int out) {
    const int in = c * h * w;
    Layer l{LayerKind::kDense, name, c, h, w, out, 1, 1};
    l.weight = add_param(name + ".weight", {out, in}, in);
    l.bias = add_param(name + ".bias", {out}, in);
    plan.layers.push_back(l);
    c = out;
    h = w = 1;
  };

  switch (arch) {
    case Architecture::kSmallCnn:
      if (shape.height % 4 != 0 || shape.width % 4 != 0) {
        throw InputError("small_cnn needs height and width divisible by 4, got " +
                         to_string(shape));
      }
      conv("conv1", kConv1Channels);
      relu();
      pool();
      conv("conv2", kConv2Channels);
      relu();
      pool();
      dense("fc1", kCnnHidden);
      relu();
      dense("fc2", k);
      break;
    case Architecture::kMlp:
      dense("fc1", kMlpHidden1);
      relu();
      dense("fc2", kMlpHidden2);
      relu();
      dense("fc3", k);
      break;
    case Architecture::kLinear:
      dense("fc", k);
      break;
  }
  return plan;
}

std::size_t element_count(const std::vector<int>& dims) {
  return std::accumulate(dims.begin(), dims.end(), std::size_t{1},
                         [](std::size_t a, int d) { return a * static_cast<std::size_t>(d); });
}

void conv_forward(const Layer& l, const float* wt, const float* bias, const double* in,
                  double* out) {
  const int hw = l.in_h * l.in_w;
  const int width = l.in_w;
  for (int o = 0; o < l.out_c; ++o) {
    double* dst_plane = out + static_cast<std::ptrdiff_t>(o) * hw;
    std::fill(dst_plane, dst_plane + hw, static_cast<double>(bias[o]));
    for (int c = 0; c < l.in_c; ++c) {
      const double* src_plane = in + static_cast<std::ptrdiff_t>(c) * hw;
      const float* k = wt + (static_cast<std::ptrdiff_t>(o) * l.in_c + c) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = std::max(0, -dy), y1 = std::min(l.in_h, l.in_h - dy);
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = std::max(0, -dx), x1 = std::min(width, width - dx);
          const double kv = k[ky * 3 + kx];
          for (int y = y0; y < y1; ++y) {
            const double* src = src_plane + (y + dy) * width + dx;
            double* dst = dst_plane + y * width;
            for (int x = x0; x < x1; ++x) dst[x] += kv * src[x];
          }
        }
      }
    }
  }
}

void conv_backward(const Layer& l, const float* wt, const double* in, const double* gout,
                   double* gin, double* gw, double* gb) {
  const int hw = l.in_h * l.in_w;
  const int width = l.in_w;
  for (int o = 0; o < l.out_c; ++o) {
    const double* g_plane = gout + static_cast<std::ptrdiff_t>(o) * hw;
    if (gb) {
      double s = 0.0;
      for (int i = 0; i < hw; ++i) s += g_plane[i];
      gb[o] += s;
    }
    for (int c = 0; c < l.in_c; ++c) {
      const double* src_plane = in + static_cast<std::ptrdiff_t>(c) * hw;
      double* gin_plane = gin ? gin + static_cast<std::ptrdiff_t>(c) * hw : nullptr;
      const std::ptrdiff_t kbase = (static_cast<std::ptrdiff_t>(o) * l.in_c + c) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        const int dy = ky - 1;
        const int y0 = std::max(0, -dy), y1 = std::min(l.in_h, l.in_h - dy);
        for (int kx = 0; kx < 3; ++kx) {
          const int dx = kx - 1;
          const int x0 = std::max(0, -dx), x1 = std::min(width, width - dx);
          const double kv = wt[kbase + ky * 3 + kx];
          double acc = 0.0;
          for (int y = y0; y < y1; ++y) {
            const double* g = g_plane + y * width;
            const double* src = src_plane + (y + dy) * width + dx;
            if (gw) {
              for (int x = x0; x < x1; ++x) acc += g[x] * src[x];
            }
            if (gin_plane) {
              double* gi = gin_plane + (y + dy) * width + dx;
              for (int x = x0; x < x1; ++x) gi[x] += kv * g[x];
            }
          }
          if (gw) gw[kbase + ky * 3 + kx] += acc;
        }
      }
    }
  }
}

void pool_forward(const Layer& l, const double* in, double* out) {
  for (int c = 0; c < l.out_c; ++c) {
    const double* src = in + static_cast<std::ptrdiff_t>(c) * l.in_h * l.in_w;
    for (int y = 0; y < l.out_h; ++y) {
      for (int x = 0; x < l.out_w; ++x) {
        const double* p = src + (2 * y) * l.in_w + 2 * x;
        out[(c * l.out_h + y) * l.out_w + x] =
            std::max(std::max(p[0], p[1]), std::max(p[l.in_w], p[l.in_w + 1]));
      }
    }
  }
}

// Gradient goes to the first maximal element in row-major window order.
void pool_backward(const Layer& l, const double* in, const double* gout, double* gin) {
  for (int c = 0; c < l.out_c; ++c) {
    const std::ptrdiff_t base = static_cast<std::ptrdiff_t>(c) * l.in_h * l.in_w;
    for (int y = 0; y < l.out_h; ++y) {
      for (int x = 0; x < l.out_w; ++x) {
        const std::ptrdiff_t idx[4] = {base + (2 * y) * l.in_w + 2 * x,
                                       base + (2 * y) * l.in_w + 2 * x + 1,
                                       base + (2 * y + 1) * l.in_w + 2 * x,
                                       base + (2 * y + 1) * l.in_w + 2 * x + 1};
        int best = 0;
        for (int j = 1; j < 4; ++j) {
          if (in[idx[j]] > in[idx[best]]) best = j;
        }
        gin[idx[best]] += gout[(c * l.out_h + y) * l.out_w + x];
      }
    }
  }
}

void dense_forward(const Layer& l, const float* wt, const float* bias, const double* in,
                   double* out) {
  const std::size_t n_in = l.in_size();
  for (int o = 0; o < l.out_c; ++o) {
    const float* row = wt + static_cast<std::size_t>(o) * n_in;
    double s = bias[o];
    for (std::size_t i = 0; i < n_in; ++i) s += row[i] * in[i];
    out[o] = s;
  }
}

void dense_backward(const Layer& l, const float* wt, const double* in, const double* gout,
                    double* gin, double* gw, double* gb) {
  const std::size_t n_in = l.in_size();
  for (int o = 0; o < l.out_c; ++o) {
    const double g = gout[o];
    if (gb) gb[o] += g;
    if (g == 0.0) continue;
    if (gw) {
      double* grow = gw + static_cast<std::size_t>(o) * n_in;
      for (std::size_t i = 0; i < n_in; ++i) grow[i] += g * in[i];
    }
    if (gin) {
      const float* row = wt + static_cast<std::size_t>(o) * n_in;
      for (std::size_t i = 0; i < n_in; ++i) gin[i] += g * row[i];
    }
  }
}

// Per-sample forward/backward with activations kept for the backward pass.
struct Pass {
  const std::vector<Layer>& layers;
  const std::vector<Tensor>& params;
  std::vector<std::vector<double>> acts;

  Pass(const std::vector<Layer>& ls, const std::vector<Tensor>& ps) : layers(ls), params(ps) {
    acts.resize(layers.size() + 1);
    acts[0].resize(layers.empty() ? 0 : layers.front().in_size());
    for (std::size_t i = 0; i < layers.size(); ++i) acts[i + 1].resize(layers[i].out_size());
  }

  // Returns the logits.
  std::span<const double> forward(std::span<const double> input) {
    std::copy(input.begin(), input.end(), acts[0].begin());
    for (std::size_t i = 0; i < layers.size(); ++i) {
      const Layer& l = layers[i];
      const double* in = acts[i].data();
      double* out = acts[i + 1].data();
      switch (l.kind) {
        case LayerKind::kConv3x3:
          conv_forward(l, params[l.weight].values.data(), params[l.bias].values.data(), in, out);
          break;
        case LayerKind::kRelu:
          for (std::size_t j = 0; j < l.out_size(); ++j) out[j] = in[j] > 0.0 ? in[j] : 0.0;
          break;
        case LayerKind::kMaxPool2:
          pool_forward(l, in, out);
          break;
        case LayerKind::kDense:
          dense_forward(l, params[l.weight].values.data(), params[l.bias].values.data(), in,
                        out);
          break;
      }
    }
    return acts.back();
  }

  // Backpropagates dL/dlogits. Either output pointer may be null.
  void backward(std::span<const double> grad_logits, std::vector<std::vector<double>>* pgrads,
                std::span<double> grad_input) {
    std::vector<double> g(grad_logits.begin(), grad_logits.end());
    std::vector<double> gprev;
    for (std::size_t i = layers.size(); i-- > 0;) {
      const Layer& l = layers[i];
      const bool need_input_grad = i > 0 || !grad_input.empty();
      gprev.assign(need_input_grad ? l.in_size() : 0, 0.0);
      double* gin = need_input_grad ? gprev.data() : nullptr;
      const double* in = acts[i].data();
      switch (l.kind) {
        case LayerKind::kConv3x3:
          conv_backward(l, params[l.weight].values.data(), in, g.data(), gin,
                        pgrads ? (*pgrads)[l.weight].data() : nullptr,
                        pgrads ? (*pgrads)[l.bias].data() : nullptr);
          break;
        case LayerKind::kRelu:
          if (gin) {
            for (std::size_t j = 0; j < l.in_size(); ++j) gin[j] = in[j] > 0.0 ? g[j] : 0.0;
          }
          break;
        case LayerKind::kMaxPool2:
          if (gin) pool_backward(l, in, g.data(), gin);
          break;
        case LayerKind::kDense:
          dense_backward(l, params[l.weight].values.data(), in, g.data(), gin,
                         pgrads ? (*pgrads)[l.weight].data() : nullptr,
                         pgrads ? (*pgrads)[l.bias].data() : nullptr);
          break;
      }
      if (!need_input_grad) return;
      g.swap(gprev);
    }
    std::copy(g.begin(), g.end(), grad_input.begin());
  }
};

void softmax(std::span<const double> logits, std::span<double> out) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    out[j] = std::exp(logits[j] - m);
    z += out[j];
  }
  for (double& v : out) v /= z;
}

// Cross-entropy from logits, computed with log-sum-exp.
double cross_entropy(std::span<const double> logits, int label) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  return std::log(z) + m - logits[label];
}

}  // namespace

Classifier::Classifier(Architecture arch, ImageShape input_shape, int num_classes,
                       std::uint64_t seed)
    : arch_(arch), shape_(input_shape), num_classes_(num_classes) {
  if (num_classes < 2) throw InputError("a classifier needs at least 2 classes");
  if (input_shape.size() == 0) throw InputError("empty input shape");
  const Plan plan = make_plan(arch, input_shape, num_classes);
  Rng rng(seed);
  for (const ParamSpec& spec : plan.params) {
    Tensor t{spec.name, spec.dims, std::vector<float>(element_count(spec.dims), 0.0f)};
    const bool is_bias = spec.name.ends_with(".bias");
    if (!is_bias) {
      const double bound = std::sqrt(6.0 / spec.fan_in);
      for (float& v : t.values) v = static_cast<float>(rng.uniform(-bound, bound));
    }
    params_.push_back(std::move(t));
  }
  metadata_.seed = seed;
  build_layers();
}

Classifier::Classifier(Architecture arch, ImageShape input_shape, int num_classes,
                       std::vector<Tensor> parameters)
    : arch_(arch), shape_(input_shape), num_classes_(num_classes) {
  if (num_classes < 2) throw InputError("a classifier needs at least 2 classes");
  const Plan plan = make_plan(arch, input_shape, num_classes);
  for (const ParamSpec& spec : plan.params) {
    auto it = std::find_if(parameters.begin(), parameters.end(),
                           [&](const Tensor& t) { return t.name == spec.name; });
    if (it == parameters.end()) throw InputError("missing parameter tensor '" + spec.name + "'");
    if (it->dims != spec.dims || it->values.size() != element_count(spec.dims)) {
      throw InputError("parameter tensor '" + spec.name + "' has the wrong shape");
    }
    params_.push_back(std::move(*it));
  }
  build_layers();
}

void Classifier::build_layers() { layers_ = make_plan(arch_, shape_, num_classes_).layers; }

void Classifier::set_metadata(ModelMetadata metadata) {
  if (metadata.attack_id == "clean" && metadata.target_label) {
    throw InputError("a clean model cannot carry a target label");
  }
  if (metadata.target_label &&
      (*metadata.target_label < 0 || *metadata.target_label >= num_classes_)) {
    throw InputError("target label outside the class range");
  }
  metadata_ = std::move(metadata);
}

const Tensor& Classifier::parameter(std::string_view name) const {
  for (const Tensor& t : params_) {
    if (t.name == name) return t;
  }
  throw InputError("no parameter named '" + std::string(name) + "'");
}

void Classifier::check_batch(const ImageBatch& batch) const {
  if (batch.shape != shape_) {
    throw InputError("batch shape " + to_string(batch.shape) + " does not match model input " +
                     to_string(shape_));
  }
  if (batch.pixels.size() != batch.size() * shape_.size()) {
    throw InputError("batch pixel buffer has the wrong length");
  }
}

Matrix Classifier::forward(const ImageBatch& batch) const {
  check_batch(batch);
  Matrix probs(batch.size(), static_cast<std::size_t>(num_classes_));
  Pass pass(layers_, params_);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    softmax(pass.forward(batch.image(i)), probs.row(i));
  }
  return probs;
}

std::vector<int> Classifier::predict(const ImageBatch& batch) const {
  check_batch(batch);
  std::vector<int> out(batch.size());
  Pass pass(layers_, params_);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out[i] = static_cast<int>(argmax(pass.forward(batch.image(i))));
  }
  return out;
}

GradientBatch Classifier::input_gradient(const ImageBatch& batch) const {
  check_batch(batch);
  for (int y : batch.labels) {
    if (y < 0 || y >= num_classes_) throw InputError("label outside the class range");
  }
  GradientBatch grads{shape_, std::vector<double>(batch.pixels.size(), 0.0)};
  Pass pass(layers_, params_);
  std::vector<double> dlogits(static_cast<std::size_t>(num_classes_));
  for (std::size_t i = 0; i < batch.size(); ++i) {
    softmax(pass.forward(batch.image(i)), dlogits);
    dlogits[static_cast<std::size_t>(batch.labels[i])] -= 1.0;
    pass.backward(dlogits, nullptr,
                  std::span<double>(grads.values.data() + i * shape_.size(), shape_.size()));
  }
  return grads;
}

double Classifier::mean_loss(const ImageBatch& batch) const {
  check_batch(batch);
  if (batch.empty()) return 0.0;
  Pass pass(layers_, params_);
  double total = 0.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    total += cross_entropy(pass.forward(batch.image(i)), batch.labels[i]);
  }
  return total / static_cast<double>(batch.size());
}

double Classifier::accumulate_parameter_gradients(const ImageBatch& batch,
                                                  std::span<const std::size_t> indices,
                                                  std::vector<std::vector<double>>& grads) const {
  check_batch(batch);
  if (grads.size() != params_.size()) {
    grads.resize(params_.size());
    for (std::size_t p = 0; p < params_.size(); ++p) grads[p].assign(params_[p].values.size(), 0.0);
  }
  Pass pass(layers_, params_);
  std::vector<double> dlogits(static_cast<std::size_t>(num_classes_));
  double total = 0.0;
  for (std::size_t i : indices) {
    const auto logits = pass.forward(batch.image(i));
    total += cross_entropy(logits, batch.labels[i]);
    softmax(logits, dlogits);
    dlogits[static_cast<std::size_t>(batch.labels[i])] -= 1.0;
    pass.backward(dlogits, &grads, {});
  }
  return total;
}

void Classifier::save(const std::filesystem::path& path) const {
  io::json meta;
  meta["architecture_id"] = to_string(arch_);
  meta["num_classes"] = num_classes_;
  meta["input_shape"] = {shape_.channels, shape_.height, shape_.width};
  meta["seed"] = metadata_.seed;
  meta["dataset_id"] = metadata_.dataset_id;
  meta["attack_id"] = metadata_.attack_id;
  meta["target_label"] =
      metadata_.target_label ? io::json(*metadata_.target_label) : io::json(nullptr);
  io::json tensors = io::json::array();
  for (const Tensor& t : params_) {
    tensors.push_back({{"name", t.name}, {"dims", t.dims}, {"count", t.values.size()}});
  }
  meta["tensors"] = tensors;

  const std::string header = meta.dump();
  std::string out(kMagic, sizeof(kMagic));
  io::append_u32(out, kFormatVersion);
  io::append_u64(out, header.size());
  out += header;
  for (const Tensor& t : params_) io::append_f32(out, t.values);
  io::write_file_atomic(path, out);
}

Classifier Classifier::load(const std::filesystem::path& path) {
  const std::string buffer = io::read_file(path);
  io::Reader r(buffer);
  if (r.bytes(sizeof(kMagic), "magic") != std::string_view(kMagic, sizeof(kMagic))) {
    throw FormatError(path.string() + ": bad magic, not a model file");
  }
  if (const auto v = r.u32("version"); v != kFormatVersion) {
    throw FormatError(path.string() + ": unsupported version " + std::to_string(v));
  }
  const std::uint64_t header_len = r.u64("header_length");
  io::json meta;
  try {
    meta = io::json::parse(r.bytes(header_len, "header"));
  } catch (const io::json::parse_error& e) {
    throw FormatError(path.string() + ": field 'header' is not valid JSON");
  }

  auto field = [&](const char* name) -> const io::json& {
    if (!meta.contains(name)) throw FormatError(path.string() + ": missing field '" + name + "'");
    return meta.at(name);
  };
  try {
    const Architecture arch = parse_architecture(field("architecture_id").get<std::string>());
    const int k = field("num_classes").get<int>();
    const auto dims = field("input_shape").get<std::vector<int>>();
    if (dims.size() != 3) throw FormatError(path.string() + ": field 'input_shape' needs 3 dims");
    const ImageShape shape{dims[0], dims[1], dims[2]};

    std::vector<Tensor> tensors;
    for (const auto& t : field("tensors")) {
      Tensor tensor;
      tensor.name = t.at("name").get<std::string>();
      tensor.dims = t.at("dims").get<std::vector<int>>();
      const auto count = t.at("count").get<std::size_t>();
      if (count != element_count(tensor.dims)) {
        throw FormatError(path.string() + ": field 'tensors." + tensor.name +
                          "' count disagrees with dims");
      }
      tensor.values = r.f32(count, "tensors." + tensor.name);
      tensors.push_back(std::move(tensor));
    }
    if (r.remaining() != 0) throw FormatError(path.string() + ": trailing bytes after weights");

    Classifier model(arch, shape, k, std::move(tensors));
    ModelMetadata md;
    md.seed = field("seed").get<std::uint64_t>();
    md.dataset_id = field("dataset_id").get<std::string>();
    md.attack_id = field("attack_id").get<std::string>();
    if (!field("target_label").is_null()) md.target_label = field("target_label").get<int>();
    model.set_metadata(std::move(md));
    return model;
  } catch (const io::json::exception& e) {
    throw FormatError(path.string() + ": malformed metadata: " + e.what());
  } catch (const InputError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

Classifier fine_tune(const Classifier& model, const Dataset& dataset, int epochs,
                     const SgdConfig& config, std::uint64_t seed) {
  if (dataset.size() == 0) throw InputError("fine_tune needs a non-empty dataset");
  if (dataset.num_classes != model.num_classes()) {
    throw InputError("dataset has " + std::to_string(dataset.num_classes) +
                     " classes, model has " + std::to_string(model.num_classes()));
  }
  if (epochs < 0) throw InputError("epochs must be non-negative");
  if (config.batch_size < 1) throw InputError("batch size must be positive");
  Classifier out = model;
  if (epochs == 0) return out;

  auto params = out.mutable_parameters();
  std::vector<std::vector<double>> velocity(params.size());
  for (std::size_t p = 0; p < params.size(); ++p) velocity[p].assign(params[p].values.size(), 0.0);

  Rng rng(seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> grads;
  for (int epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      std::span<const std::size_t> idx(order.data() + start, stop - start);
      for (auto& g : grads) std::fill(g.begin(), g.end(), 0.0);
      const double loss = out.accumulate_parameter_gradients(dataset.data, idx, grads);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", sample " +
                            std::to_string(start));
      }
      const double scale = 1.0 / static_cast<double>(idx.size());
      for (std::size_t p = 0; p < params.size(); ++p) {
        auto& values = params[p].values;
        auto& vel = velocity[p];
        const auto& g = grads[p];
        for (std::size_t j = 0; j < values.size(); ++j) {
          const double grad = g[j] * scale + config.weight_decay * values[j];
          vel[j] = config.momentum * vel[j] + grad;
          values[j] = static_cast<float>(values[j] - config.learning_rate * vel[j]);
        }
      }
    }
  }
  for (const Tensor& t : params) {
    for (float v : t.values) {
      if (!std::isfinite(v)) throw TrainingError("parameter '" + t.name + "' became non-finite");
    }
  }
  return out;
}

}  // namespace a2p
