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

#ifndef SOUNDSAL_MASKER_H_
#define SOUNDSAL_MASKER_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "soundsal/dataset.h"
#include "soundsal/grid.h"
#include "soundsal/mlp.h"
#include "soundsal/random.h"

namespace soundsal {

// Ways of producing the image x_bar that fills the discarded part of x.
struct GrayFill {
  double level = 0.5;
};
// Uniformly drawn image from `pool`. `exclude` names a pool index that must
// never be drawn (the explained image when it belongs to the pool). The pool
// is not owned and must outlive every use of the fill.
struct RandomImageFill {
  const LabeledDataset* pool = nullptr;
  std::optional<std::size_t> exclude;
};
struct BlurFill {
  double sigma = 1.0;
};
using FillStrategy = std::variant<GrayFill, RandomImageFill, BlurFill>;

void ValidateFill(const FillStrategy& fill);
std::string DescribeFill(const FillStrategy& fill);

// Draws one fill image for x. Only RandomImageFill consumes randomness.
Image DrawFill(const Image& x, const FillStrategy& fill, RandomStream& stream);

// x_tilde = m * x + (1 - m) * fill, elementwise.
Image CompositeWith(const Image& x, const Grid& mask, const Image& fill);
Image Composite(const Image& x, const Grid& mask, const FillStrategy& fill,
                RandomStream& stream);

// A saliency map. `raw()` keeps the method's scores; Normalized() rescales
// them to [0, 1] by min-max, mapping constant maps to 0.5.
class Heatmap {
 public:
  Heatmap() = default;
  explicit Heatmap(Grid raw) : raw_(std::move(raw)) {}

  const Grid& raw() const { return raw_; }
  Grid Normalized() const;

  bool operator==(const Heatmap&) const = default;

 private:
  Grid raw_;
};

struct MaskConfig {
  double lambda_tv = 0.01;
  double lambda_l1 = 4e-3;
  int scale = 1;
  int steps = 2000;
  double learning_rate = 0.05;
  int distractors_per_step = 10;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  FillStrategy fill = RandomImageFill{};
  std::uint64_t seed = 1;
  // The penalty-inclusive objective is recorded on a fixed batch of this many
  // distractors every `trace_every` steps (and at the first and last step).
  int heldout_distractors = 10;
  int trace_every = 100;
};

void ValidateMaskConfig(const MaskConfig& config, int height, int width);

// Sigmoid mask M = sigmoid(W) and its upsampled version.
Grid SigmoidMask(const Grid& weights);

// The mask objective for one (model, image, label):
//   mean_k[-log f(M_up * x + (1 - M_up) * xbar_k, label)]
//     + lambda_tv * TV(M_up) + lambda_l1 * |M_up|_1,
// with M_up = upsample(sigmoid(W), scale), as a function of W for a fixed
// batch of fill images.
class MaskObjective {
 public:
  MaskObjective(const MlpClassifier& model, const Image& x, int label,
                const MaskConfig& config);

  struct Value {
    double total = 0.0;
    double data_term = 0.0;
    double tv_term = 0.0;
    double l1_term = 0.0;
  };

  // Fills `gradient` (same shape as weights) with d total / d W.
  Value Evaluate(const Grid& weights, std::span<const Image> fills,
                 Grid* gradient) const;

 private:
  const MlpClassifier& model_;
  const Image& x_;
  int label_;
  double lambda_tv_;
  double lambda_l1_;
  int scale_;
};

struct MaskResult {
  Heatmap heatmap;          // upsampled mask, values in [0, 1]
  Grid weights;             // final pre-sigmoid weights
  std::vector<int> trace_steps;
  std::vector<double> heldout_objective;
};

// Adam on the mask objective from W = 0. A fresh batch of fill images is drawn
// every step from the stream (config.seed, task_id). Throws NumericalError if
// the objective becomes non-finite.
MaskResult LearnMask(const MlpClassifier& model, const Image& x, int label,
                     const MaskConfig& config, std::uint64_t task_id = 0);

// Task id used for label `label` of the image whose task id is `image_task`.
std::uint64_t LabelTaskId(std::uint64_t image_task, int label);

// One mask per label, each with its own derived stream, so the result is the
// same for every thread count.
std::vector<MaskResult> LearnMasksAllLabels(const MlpClassifier& model,
                                            const Image& x,
                                            const MaskConfig& config,
                                            std::uint64_t image_task = 0,
                                            int threads = 1);

// Raw map: d logit_label / d x, times x.
Heatmap GradientInputMap(const MlpClassifier& model, const Image& x, int label);
// Raw map: iid standard normal entries.
Heatmap RandomMap(int height, int width, RandomStream& stream);
// Raw map: isotropic Gaussian bump at the grid center with
// sigma = sigma_fraction * min(height, width).
Heatmap CenteredGaussianMap(int height, int width, double sigma_fraction);

// Every label gets the predicted label's map.
std::vector<Heatmap> CheatingVariant(const std::vector<Heatmap>& maps,
                                     int predicted_label);

}  // namespace soundsal

#endif  // SOUNDSAL_MASKER_H_
