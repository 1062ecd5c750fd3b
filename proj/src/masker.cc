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

#include "soundsal/masker.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "soundsal/error.h"
#include "soundsal/kernels.h"
#include "soundsal/parallel.h"

namespace soundsal {

namespace {

constexpr std::uint64_t kHeldoutBatchTag = 0x4e1d;

double Sigmoid(double w) { return 1.0 / (1.0 + std::exp(-w)); }

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

}  // namespace

void ValidateFill(const FillStrategy& fill) {
  std::visit(
      Overloaded{
          [](const GrayFill& g) {
            if (!(g.level >= 0.0 && g.level <= 1.0)) {
              throw InvalidArgument("gray level must be in [0, 1]");
            }
          },
          [](const RandomImageFill& r) {
            if (r.pool == nullptr || r.pool->empty()) {
              throw InvalidArgument("random-image fill needs a non-empty pool");
            }
            const std::size_t usable =
                r.pool->size() -
                (r.exclude && *r.exclude < r.pool->size() ? 1 : 0);
            if (usable == 0) {
              throw InvalidArgument(
                  "random-image fill pool is empty once the explained image is "
                  "excluded");
            }
          },
          [](const BlurFill& b) {
            if (!(b.sigma > 0.0)) throw InvalidArgument("blur sigma must be positive");
          }},
      fill);
}

std::string DescribeFill(const FillStrategy& fill) {
  std::ostringstream out;
  std::visit(Overloaded{[&](const GrayFill& g) { out << "gray:" << g.level; },
                        [&](const RandomImageFill&) { out << "random_image"; },
                        [&](const BlurFill& b) { out << "blur:" << b.sigma; }},
             fill);
  return out.str();
}

Image DrawFill(const Image& x, const FillStrategy& fill, RandomStream& stream) {
  ValidateFill(fill);
  return std::visit(
      Overloaded{
          [&](const GrayFill& g) { return Image(x.height(), x.width(), g.level); },
          [&](const RandomImageFill& r) {
            const std::size_t n = r.pool->size();
            std::size_t pick;
            if (r.exclude && *r.exclude < n) {
              pick = stream.NextBelow(n - 1);
              if (pick >= *r.exclude) ++pick;
            } else {
              pick = stream.NextBelow(n);
            }
            const Image& chosen = r.pool->images[pick];
            CheckSameShape(chosen, x, "distractor image");
            return chosen;
          },
          [&](const BlurFill& b) { return GaussianBlur(x, b.sigma); }},
      fill);
}

Image CompositeWith(const Image& x, const Grid& mask, const Image& fill) {
  CheckSameShape(x, mask, "composite mask");
  CheckSameShape(x, fill, "composite fill");
  Image out(x.height(), x.width());
  kernels::Blend(mask.values(), x.values(), fill.values(), out.values());
  return out;
}

Image Composite(const Image& x, const Grid& mask, const FillStrategy& fill,
                RandomStream& stream) {
  CheckSameShape(x, mask, "composite mask");
  return CompositeWith(x, mask, DrawFill(x, fill, stream));
}

Grid Heatmap::Normalized() const {
  Grid out(raw_.height(), raw_.width());
  if (raw_.empty()) return out;
  const double lo = Min(raw_);
  const double hi = Max(raw_);
  if (!(hi > lo)) {
    for (double& v : out.values()) v = 0.5;
    return out;
  }
  for (std::size_t k = 0; k < raw_.size(); ++k) {
    out[k] = std::clamp((raw_[k] - lo) / (hi - lo), 0.0, 1.0);
  }
  return out;
}

void ValidateMaskConfig(const MaskConfig& config, int height, int width) {
  if (config.scale < 1 || height % config.scale != 0 || width % config.scale != 0) {
    throw DimensionError("image " + std::to_string(height) + "x" +
                         std::to_string(width) +
                         " is not divisible by mask scale " +
                         std::to_string(config.scale));
  }
  if (!(config.lambda_tv >= 0.0) || !(config.lambda_l1 >= 0.0)) {
    throw InvalidArgument("mask penalties must be non-negative");
  }
  if (config.steps < 1 || config.distractors_per_step < 1 ||
      !(config.learning_rate > 0.0) || config.heldout_distractors < 1 ||
      config.trace_every < 1) {
    throw InvalidArgument(
        "mask steps, distractors, trace settings and learning rate must be "
        "positive");
  }
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0) ||
      !(config.beta2 >= 0.0 && config.beta2 < 1.0) || !(config.epsilon > 0.0)) {
    throw InvalidArgument("Adam needs beta1, beta2 in [0, 1) and epsilon > 0");
  }
  ValidateFill(config.fill);
}

Grid SigmoidMask(const Grid& weights) {
  Grid out(weights.height(), weights.width());
  for (std::size_t k = 0; k < weights.size(); ++k) out[k] = Sigmoid(weights[k]);
  return out;
}

MaskObjective::MaskObjective(const MlpClassifier& model, const Image& x,
                             int label, const MaskConfig& config)
    : model_(model),
      x_(x),
      label_(label),
      lambda_tv_(config.lambda_tv),
      lambda_l1_(config.lambda_l1),
      scale_(config.scale) {
  if (label < 0 || label >= model.class_count) {
    throw InvalidArgument("label " + std::to_string(label) + " out of range");
  }
  if (x.size() != static_cast<std::size_t>(model.input_dim)) {
    throw DimensionError("image does not match the model input size");
  }
}

MaskObjective::Value MaskObjective::Evaluate(const Grid& weights,
                                             std::span<const Image> fills,
                                             Grid* gradient) const {
  if (fills.empty()) throw InvalidArgument("mask objective needs fill images");
  const Grid mask = SigmoidMask(weights);
  const Grid upsampled = BilinearUpsample(mask, scale_);
  CheckSameShape(upsampled, x_, "upsampled mask");

  Value value;
  Grid grad_up(x_.height(), x_.width());
  Image composite(x_.height(), x_.width());
  std::vector<double> input_grad(x_.size());
  std::vector<double> dlogits(model_.class_count);
  ForwardTrace trace;
  for (const Image& fill : fills) {
    CheckSameShape(fill, x_, "fill image");
    kernels::Blend(upsampled.values(), x_.values(), fill.values(),
                   composite.values());
    ForwardInto(model_, composite.values(), trace);
    value.data_term += CrossEntropyFromLogits(trace.logits, label_);
    if (gradient == nullptr) continue;
    for (int c = 0; c < model_.class_count; ++c) {
      dlogits[c] = trace.probabilities[c] - (c == label_ ? 1.0 : 0.0);
    }
    std::fill(input_grad.begin(), input_grad.end(), 0.0);
    BackpropToInput(model_, trace, dlogits, input_grad);
    for (std::size_t k = 0; k < x_.size(); ++k) {
      grad_up[k] += input_grad[k] * (x_[k] - fill[k]);
    }
  }
  const double inv = 1.0 / static_cast<double>(fills.size());
  value.data_term *= inv;
  value.tv_term = lambda_tv_ * TotalVariation(upsampled);
  value.l1_term = lambda_l1_ * Sum(upsampled);  // entries are non-negative
  value.total = value.data_term + value.tv_term + value.l1_term;
  if (gradient == nullptr) return value;

  for (double& g : grad_up.values()) g = g * inv + lambda_l1_;
  if (lambda_tv_ != 0.0) {
    const Grid tv = TotalVariationSubgradient(upsampled);
    for (std::size_t k = 0; k < grad_up.size(); ++k) grad_up[k] += lambda_tv_ * tv[k];
  }
  Grid grad_mask = BilinearUpsampleAdjoint(grad_up, scale_);
  for (std::size_t k = 0; k < grad_mask.size(); ++k) {
    grad_mask[k] *= mask[k] * (1.0 - mask[k]);
  }
  *gradient = std::move(grad_mask);
  return value;
}

MaskResult LearnMask(const MlpClassifier& model, const Image& x, int label,
                     const MaskConfig& config, std::uint64_t task_id) {
  ValidateMaskConfig(config, x.height(), x.width());
  const MaskObjective objective(model, x, label, config);

  RandomStream stream(config.seed, task_id);
  std::vector<Image> heldout;
  {
    RandomStream heldout_stream = stream.Derive(kHeldoutBatchTag);
    for (int k = 0; k < config.heldout_distractors; ++k) {
      heldout.push_back(DrawFill(x, config.fill, heldout_stream));
    }
  }

  const int low_h = x.height() / config.scale;
  const int low_w = x.width() / config.scale;
  Grid weights(low_h, low_w, 0.0);
  std::vector<double> first_moment(weights.size(), 0.0);
  std::vector<double> second_moment(weights.size(), 0.0);
  std::vector<Image> fills(config.distractors_per_step);
  Grid gradient;
  MaskResult result;
  double beta1_power = 1.0;
  double beta2_power = 1.0;

  auto record = [&](int step) {
    result.trace_steps.push_back(step);
    result.heldout_objective.push_back(
        objective.Evaluate(weights, heldout, nullptr).total);
  };

  for (int step = 0; step < config.steps; ++step) {
    if (step % config.trace_every == 0) record(step);
    for (Image& fill : fills) fill = DrawFill(x, config.fill, stream);
    const MaskObjective::Value value = objective.Evaluate(weights, fills, &gradient);
    if (!std::isfinite(value.total)) {
      std::ostringstream msg;
      msg << "mask objective diverged at step " << step << " (label " << label
          << "): data=" << value.data_term << " tv=" << value.tv_term
          << " l1=" << value.l1_term;
      throw NumericalError(msg.str());
    }
    beta1_power *= config.beta1;
    beta2_power *= config.beta2;
    const double step_size = config.learning_rate * std::sqrt(1.0 - beta2_power) /
                             (1.0 - beta1_power);
    for (std::size_t k = 0; k < weights.size(); ++k) {
      const double g = gradient[k];
      first_moment[k] = config.beta1 * first_moment[k] + (1.0 - config.beta1) * g;
      second_moment[k] =
          config.beta2 * second_moment[k] + (1.0 - config.beta2) * g * g;
      weights[k] -= step_size * first_moment[k] /
                    (std::sqrt(second_moment[k]) +
                     config.epsilon * std::sqrt(1.0 - beta2_power));
    }
  }
  record(config.steps);

  result.heatmap = Heatmap(BilinearUpsample(SigmoidMask(weights), config.scale));
  result.weights = std::move(weights);
  return result;
}

std::uint64_t LabelTaskId(std::uint64_t image_task, int label) {
  return CombineIds(image_task, static_cast<std::uint64_t>(label) + 1);
}

std::vector<MaskResult> LearnMasksAllLabels(const MlpClassifier& model,
                                            const Image& x,
                                            const MaskConfig& config,
                                            std::uint64_t image_task,
                                            int threads) {
  std::vector<MaskResult> results(model.class_count);
  ParallelFor(results.size(), threads, [&](std::size_t label) {
    results[label] = LearnMask(model, x, static_cast<int>(label), config,
                               LabelTaskId(image_task, static_cast<int>(label)));
  });
  return results;
}

Heatmap GradientInputMap(const MlpClassifier& model, const Image& x, int label) {
  Grid raw = InputGradient(model, x, label);
  for (std::size_t k = 0; k < raw.size(); ++k) raw[k] *= x[k];
  return Heatmap(std::move(raw));
}

Heatmap RandomMap(int height, int width, RandomStream& stream) {
  Grid raw(height, width);
  for (double& v : raw.values()) v = stream.NextGaussian();
  return Heatmap(std::move(raw));
}

Heatmap CenteredGaussianMap(int height, int width, double sigma_fraction) {
  if (!(sigma_fraction > 0.0)) {
    throw InvalidArgument("sigma_fraction must be positive");
  }
  const double sigma = sigma_fraction * std::min(height, width);
  const double ci = 0.5 * (height - 1);
  const double cj = 0.5 * (width - 1);
  Grid raw(height, width);
  for (int i = 0; i < height; ++i) {
    for (int j = 0; j < width; ++j) {
      const double d2 = (i - ci) * (i - ci) + (j - cj) * (j - cj);
      raw(i, j) = std::exp(-d2 / (2.0 * sigma * sigma));
    }
  }
  return Heatmap(std::move(raw));
}

std::vector<Heatmap> CheatingVariant(const std::vector<Heatmap>& maps,
                                     int predicted_label) {
  if (predicted_label < 0 || predicted_label >= static_cast<int>(maps.size())) {
    throw InvalidArgument("predicted label has no map");
  }
  return std::vector<Heatmap>(maps.size(), maps[predicted_label]);
}

}  // namespace soundsal
