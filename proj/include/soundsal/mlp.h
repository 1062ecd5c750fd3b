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

#ifndef SOUNDSAL_MLP_H_
#define SOUNDSAL_MLP_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "soundsal/dataset.h"
#include "soundsal/grid.h"

namespace soundsal {

// One-hidden-layer ReLU network over flattened images:
//   softmax(W2 * relu(W1 * x + b1) + b2).
// Weight matrices are row-major: w1 is hidden_dim x input_dim, w2 is
// class_count x hidden_dim.
struct MlpClassifier {
  int input_dim = 0;
  int hidden_dim = 0;
  int class_count = 0;
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  static MlpClassifier Zeros(int input_dim, int hidden_dim, int class_count);
  // Gaussian weights with standard deviation 1/sqrt(fan_in), zero biases.
  static MlpClassifier Initialize(int input_dim, int hidden_dim,
                                  int class_count, std::uint64_t seed);

  std::span<const double> W1Row(int unit) const {
    return std::span<const double>(w1).subspan(
        static_cast<std::size_t>(unit) * input_dim, input_dim);
  }
  std::span<const double> W2Row(int label) const {
    return std::span<const double>(w2).subspan(
        static_cast<std::size_t>(label) * hidden_dim, hidden_dim);
  }

  bool operator==(const MlpClassifier&) const = default;
};

// Throws InvalidArgument if parameter vector sizes disagree with the
// declared dimensions or any parameter is non-finite.
void ValidateModel(const MlpClassifier& model);

// Intermediate values of one forward pass, reusable across calls to avoid
// reallocation in hot loops.
struct ForwardTrace {
  std::vector<double> hidden_pre;
  std::vector<double> hidden;
  std::vector<double> logits;
  std::vector<double> probabilities;
};

void ForwardInto(const MlpClassifier& model, std::span<const double> input,
                 ForwardTrace& trace);

std::vector<double> Forward(const MlpClassifier& model, const Image& x);
std::vector<double> Logits(const MlpClassifier& model, const Image& x);
int Predict(const MlpClassifier& model, const Image& x);
double Accuracy(const MlpClassifier& model, const LabeledDataset& data);

// -log softmax(logits)[label], computed stably.
double CrossEntropyFromLogits(std::span<const double> logits, int label);

// Given dL/dlogits for the pass recorded in `trace`, adds dL/dinput to
// `input_gradient`.
void BackpropToInput(const MlpClassifier& model, const ForwardTrace& trace,
                     std::span<const double> logit_gradient,
                     std::span<double> input_gradient);

// d logit[label] / d x.
Grid InputGradient(const MlpClassifier& model, const Image& x, int label);
// d(-log f(x, label)) / d x.
Grid LossInputGradient(const MlpClassifier& model, const Image& x, int label);

// Gradient of the cross-entropy with respect to every parameter, same layout
// as the model.
struct ParameterGradient {
  std::vector<double> w1;
  std::vector<double> b1;
  std::vector<double> w2;
  std::vector<double> b2;

  static ParameterGradient ZerosLike(const MlpClassifier& model);
};

// Returns the cross-entropy of one sample and adds its parameter gradient to
// `accumulator`.
double AccumulateLossGradient(const MlpClassifier& model, const Image& x,
                              int label, ParameterGradient& accumulator);

struct TrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double learning_rate = 0.1;
  std::uint64_t seed = 1;
};

struct TrainResult {
  MlpClassifier model;
  std::vector<double> epoch_loss;  // mean cross-entropy per epoch
};

// Minibatch gradient descent on mean cross-entropy. Sample order is
// reshuffled every epoch from the config seed.
TrainResult Train(MlpClassifier model, const LabeledDataset& data,
                  const TrainConfig& config);

// Resamples W2 and b2 from zero-mean Gaussians whose standard deviations
// match the current per-tensor standard deviations. W1 and b1 are kept.
MlpClassifier RandomizeLastLayer(const MlpClassifier& model, std::uint64_t seed);

// Binary "SSMF" format, version 1, little-endian doubles.
void SaveModel(const MlpClassifier& model, const std::string& path);
MlpClassifier LoadModel(const std::string& path);
std::string EncodeModel(const MlpClassifier& model);
MlpClassifier DecodeModel(std::string bytes, const std::string& source);

}  // namespace soundsal

#endif  // SOUNDSAL_MLP_H_
