// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "soundsal/mlp.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "binary_io.h"
#include "soundsal/error.h"
#include "soundsal/kernels.h"
#include "soundsal/random.h"

namespace soundsal {

namespace {

constexpr char kModelMagic[] = "SSMF";
constexpr std::uint32_t kModelVersion = 1;

void CheckInput(const MlpClassifier& model, std::size_t size) {
  if (size != static_cast<std::size_t>(model.input_dim)) {
    throw DimensionError("input has " + std::to_string(size) +
                         " values, model expects " +
                         std::to_string(model.input_dim));
  }
}

void CheckLabel(const MlpClassifier& model, int label) {
  if (label < 0 || label >= model.class_count) {
    throw InvalidArgument("label " + std::to_string(label) +
                          " out of range for " +
                          std::to_string(model.class_count) + " classes");
  }
}

double StdDev(std::span<const double> values) {
  if (values.empty()) return 0.0;
  const double mean =
      std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / values.size());
}

void Softmax(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (std::size_t c = 0; c < logits.size(); ++c) {
    out[c] = std::exp(logits[c] - peak);
    total += out[c];
  }
  for (double& p : out) p /= total;
}

}  // namespace

MlpClassifier MlpClassifier::Zeros(int input_dim, int hidden_dim,
                                   int class_count) {
  if (input_dim <= 0 || hidden_dim <= 0 || class_count <= 0) {
    throw InvalidArgument("model dimensions must be positive");
  }
  MlpClassifier m;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m.class_count = class_count;
  m.w1.assign(static_cast<std::size_t>(hidden_dim) * input_dim, 0.0);
  m.b1.assign(hidden_dim, 0.0);
  m.w2.assign(static_cast<std::size_t>(class_count) * hidden_dim, 0.0);
  m.b2.assign(class_count, 0.0);
  return m;
}

MlpClassifier MlpClassifier::Initialize(int input_dim, int hidden_dim,
                                        int class_count, std::uint64_t seed) {
  MlpClassifier m = Zeros(input_dim, hidden_dim, class_count);
  RandomStream stream(seed, /*task_id=*/0x1417);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  for (double& w : m.w1) w = s1 * stream.NextGaussian();
  for (double& w : m.w2) w = s2 * stream.NextGaussian();
  return m;
}

void ValidateModel(const MlpClassifier& model) {
  const auto in = static_cast<std::size_t>(model.input_dim);
  const auto hid = static_cast<std::size_t>(model.hidden_dim);
  const auto cls = static_cast<std::size_t>(model.class_count);
  if (model.input_dim <= 0 || model.hidden_dim <= 0 || model.class_count <= 0 ||
      model.w1.size() != hid * in || model.b1.size() != hid ||
      model.w2.size() != cls * hid || model.b2.size() != cls) {
    throw InvalidArgument("model parameter sizes do not match its dimensions");
  }
  for (const auto* tensor : {&model.w1, &model.b1, &model.w2, &model.b2}) {
    for (double v : *tensor) {
      if (!std::isfinite(v)) throw InvalidArgument("model has non-finite parameters");
    }
  }
}

void ForwardInto(const MlpClassifier& model, std::span<const double> input,
                 ForwardTrace& trace) {
  CheckInput(model, input.size());
  trace.hidden_pre.resize(model.hidden_dim);
  trace.hidden.resize(model.hidden_dim);
  trace.logits.resize(model.class_count);
  trace.probabilities.resize(model.class_count);
  for (int j = 0; j < model.hidden_dim; ++j) {
    const double pre = kernels::Dot(model.W1Row(j), input) + model.b1[j];
    trace.hidden_pre[j] = pre;
    trace.hidden[j] = pre > 0.0 ? pre : 0.0;
  }
  for (int c = 0; c < model.class_count; ++c) {
    trace.logits[c] = kernels::Dot(model.W2Row(c), trace.hidden) + model.b2[c];
  }
  Softmax(trace.logits, trace.probabilities);
}

std::vector<double> Forward(const MlpClassifier& model, const Image& x) {
  ForwardTrace trace;
  ForwardInto(model, x.values(), trace);
  return trace.probabilities;
}

std::vector<double> Logits(const MlpClassifier& model, const Image& x) {
  ForwardTrace trace;
  ForwardInto(model, x.values(), trace);
  return trace.logits;
}

int Predict(const MlpClassifier& model, const Image& x) {
  const std::vector<double> p = Forward(model, x);
  return static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
}

double Accuracy(const MlpClassifier& model, const LabeledDataset& data) {
  if (data.empty()) throw InvalidArgument("accuracy of an empty dataset");
  std::size_t correct = 0;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (Predict(model, data.images[k]) == data.labels[k]) ++correct;
  }
  return static_cast<double>(correct) / data.size();
}

double CrossEntropyFromLogits(std::span<const double> logits, int label) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double z : logits) total += std::exp(z - peak);
  return peak + std::log(total) - logits[label];
}

void BackpropToInput(const MlpClassifier& model, const ForwardTrace& trace,
                     std::span<const double> logit_gradient,
                     std::span<double> input_gradient) {
  CheckInput(model, input_gradient.size());
  for (int j = 0; j < model.hidden_dim; ++j) {
    if (trace.hidden_pre[j] <= 0.0) continue;
    double g = 0.0;
    for (int c = 0; c < model.class_count; ++c) {
      g += logit_gradient[c] *
           model.w2[static_cast<std::size_t>(c) * model.hidden_dim + j];
    }
    if (g != 0.0) kernels::Axpy(g, model.W1Row(j), input_gradient);
  }
}

Grid InputGradient(const MlpClassifier& model, const Image& x, int label) {
  CheckLabel(model, label);
  ForwardTrace trace;
  ForwardInto(model, x.values(), trace);
  std::vector<double> dlogits(model.class_count, 0.0);
  dlogits[label] = 1.0;
  Grid out(x.height(), x.width());
  BackpropToInput(model, trace, dlogits, out.values());
  return out;
}

Grid LossInputGradient(const MlpClassifier& model, const Image& x, int label) {
  CheckLabel(model, label);
  ForwardTrace trace;
  ForwardInto(model, x.values(), trace);
  std::vector<double> dlogits = trace.probabilities;
  dlogits[label] -= 1.0;
  Grid out(x.height(), x.width());
  BackpropToInput(model, trace, dlogits, out.values());
  return out;
}

ParameterGradient ParameterGradient::ZerosLike(const MlpClassifier& model) {
  ParameterGradient g;
  g.w1.assign(model.w1.size(), 0.0);
  g.b1.assign(model.b1.size(), 0.0);
  g.w2.assign(model.w2.size(), 0.0);
  g.b2.assign(model.b2.size(), 0.0);
  return g;
}

double AccumulateLossGradient(const MlpClassifier& model, const Image& x,
                              int label, ParameterGradient& acc) {
  CheckLabel(model, label);
  ForwardTrace trace;
  ForwardInto(model, x.values(), trace);
  const double loss = CrossEntropyFromLogits(trace.logits, label);
  std::vector<double> dlogits = trace.probabilities;
  dlogits[label] -= 1.0;
  std::vector<double> dhidden(model.hidden_dim, 0.0);
  for (int c = 0; c < model.class_count; ++c) {
    acc.b2[c] += dlogits[c];
    std::span<double> row(acc.w2.data() + static_cast<std::size_t>(c) * model.hidden_dim,
                          model.hidden_dim);
    kernels::Axpy(dlogits[c], trace.hidden, row);
    kernels::Axpy(dlogits[c], model.W2Row(c), dhidden);
  }
  for (int j = 0; j < model.hidden_dim; ++j) {
    if (trace.hidden_pre[j] <= 0.0) continue;
    acc.b1[j] += dhidden[j];
    std::span<double> row(acc.w1.data() + static_cast<std::size_t>(j) * model.input_dim,
                          model.input_dim);
    kernels::Axpy(dhidden[j], x.values(), row);
  }
  return loss;
}

TrainResult Train(MlpClassifier model, const LabeledDataset& data,
                  const TrainConfig& config) {
  if (data.empty()) throw InvalidArgument("cannot train on an empty dataset");
  if (config.epochs < 1 || config.batch_size < 1 || !(config.learning_rate > 0.0)) {
    throw InvalidArgument("train config needs epochs >= 1, batch_size >= 1, lr > 0");
  }
  ValidateModel(model);
  for (int label : data.labels) CheckLabel(model, label);
  if (static_cast<std::size_t>(data.height) * data.width !=
      static_cast<std::size_t>(model.input_dim)) {
    throw DimensionError("dataset images do not match the model input size");
  }

  TrainResult result;
  std::vector<std::size_t> order(data.size());
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), 0);
    RandomStream stream(config.seed, 0x7a11 + static_cast<std::uint64_t>(epoch));
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[stream.NextBelow(i)]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      ParameterGradient grad = ParameterGradient::ZerosLike(model);
      for (std::size_t k = start; k < end; ++k) {
        epoch_loss += AccumulateLossGradient(model, data.images[order[k]],
                                             data.labels[order[k]], grad);
      }
      const double step = -config.learning_rate / static_cast<double>(end - start);
      kernels::Axpy(step, grad.w1, model.w1);
      kernels::Axpy(step, grad.b1, model.b1);
      kernels::Axpy(step, grad.w2, model.w2);
      kernels::Axpy(step, grad.b2, model.b2);
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss)) {
      throw NumericalError("training loss became non-finite at epoch " +
                           std::to_string(epoch));
    }
    result.epoch_loss.push_back(epoch_loss);
  }
  result.model = std::move(model);
  return result;
}

MlpClassifier RandomizeLastLayer(const MlpClassifier& model, std::uint64_t seed) {
  ValidateModel(model);
  MlpClassifier out = model;
  RandomStream stream(seed, /*task_id=*/0x5a17);
  const double sw = StdDev(model.w2);
  const double sb = StdDev(model.b2);
  for (double& w : out.w2) w = sw * stream.NextGaussian();
  for (double& b : out.b2) b = sb * stream.NextGaussian();
  return out;
}

std::string EncodeModel(const MlpClassifier& model) {
  ValidateModel(model);
  internal::ByteWriter writer;
  writer.Bytes(std::string_view(kModelMagic, 4));
  writer.Put<std::uint32_t>(kModelVersion);
  writer.Put<std::uint32_t>(static_cast<std::uint32_t>(model.input_dim));
  writer.Put<std::uint32_t>(static_cast<std::uint32_t>(model.hidden_dim));
  writer.Put<std::uint32_t>(static_cast<std::uint32_t>(model.class_count));
  for (const auto* tensor : {&model.w1, &model.b1, &model.w2, &model.b2}) {
    for (double v : *tensor) writer.Put<double>(v);
  }
  return writer.buffer();
}

MlpClassifier DecodeModel(std::string bytes, const std::string& source) {
  internal::ByteReader reader(std::move(bytes), source);
  if (reader.remaining() < 4 || reader.Bytes(4) != std::string_view(kModelMagic, 4)) {
    throw FormatError(source + ": bad magic (expected SSMF)");
  }
  const auto version = reader.Get<std::uint32_t>();
  if (version != kModelVersion) {
    throw FormatError(source + ": unsupported model version " +
                      std::to_string(version));
  }
  const auto in = reader.Get<std::uint32_t>();
  const auto hid = reader.Get<std::uint32_t>();
  const auto cls = reader.Get<std::uint32_t>();
  if (in == 0 || hid == 0 || cls == 0 || in > (1u << 24) || hid > (1u << 16) ||
      cls > (1u << 16)) {
    throw FormatError(source + ": implausible model dimensions");
  }
  const std::size_t expected =
      (static_cast<std::size_t>(hid) * in + hid + static_cast<std::size_t>(cls) * hid + cls) *
      sizeof(double);
  if (reader.remaining() != expected) {
    throw FormatError(source + ": parameter payload has " +
                      std::to_string(reader.remaining()) + " bytes, expected " +
                      std::to_string(expected));
  }
  MlpClassifier m = MlpClassifier::Zeros(static_cast<int>(in), static_cast<int>(hid),
                                         static_cast<int>(cls));
  for (auto* tensor : {&m.w1, &m.b1, &m.w2, &m.b2}) {
    for (double& v : *tensor) v = reader.Get<double>();
  }
  try {
    ValidateModel(m);
  } catch (const Error& e) {
    throw FormatError(source + ": " + e.what());
  }
  return m;
}

void SaveModel(const MlpClassifier& model, const std::string& path) {
  internal::WriteWholeFile(path, EncodeModel(model));
}

MlpClassifier LoadModel(const std::string& path) {
  return DecodeModel(internal::ReadWholeFile(path), path);
}

}  // namespace soundsal
