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

#ifndef SOUNDSAL_METRICS_H_
#define SOUNDSAL_METRICS_H_

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "soundsal/grid.h"
#include "soundsal/masker.h"
#include "soundsal/mlp.h"
#include "soundsal/random.h"

namespace soundsal {

struct MetricThresholds {
  double eps1 = 0.01;   // completeness floor
  double eps2 = 0.001;  // soundness floor
};

void ValidateThresholds(const MetricThresholds& thresholds);

// Pixel indices sorted by descending score; equal scores keep ascending
// row-major order.
std::vector<int> RankPixels(const Grid& scores);

// Ones at the `count` highest-scoring pixels (ties by ascending index).
Grid TopSBinarize(const Grid& scores, int count);

struct CurveReport {
  std::vector<double> retention;    // s / n for s = 1..n
  std::vector<double> probability;  // f(x_s, label)
  double auc = 0.0;                 // mean of `probability`
  // f(x, label) on the unmodified image. For deletion curves this is the
  // s = 0 point that precedes the recorded steps.
  double start_probability = 0.0;
  std::string fill;
};

// Insertion game: keep the top-s pixels of x, replace the rest by the fill
// image (gray by default), for every s = 1..n. The area is the plain mean
// over s, i.e. the expectation over s uniform on {1..n}. Only gray and blur
// fills are accepted here.
CurveReport InsertionCurve(const MlpClassifier& model, const Image& x, int label,
                           const Grid& scores,
                           const FillStrategy& fill = GrayFill{});

// Deletion game: replace the top-s pixels by the fill, keep the rest.
CurveReport DeletionCurve(const MlpClassifier& model, const Image& x, int label,
                          const Grid& scores,
                          const FillStrategy& fill = GrayFill{});

// Monte-Carlo estimate of the insertion AUC: mean of f(x_s, label) for s drawn
// uniformly from {1..n}.
double GAucSampled(const MlpClassifier& model, const Image& x, int label,
                   const Grid& scores, int samples, RandomStream& stream,
                   const FillStrategy& fill = GrayFill{});

// alpha = min(max(g, eps1) / f, 1). Requires f > 0.
double CompletenessScore(double g, double f, double eps1);
// beta = min(max(f, eps2) / g, 1); beta = 1 when g == 0.
double SoundnessScore(double f, double g, double eps2);

enum class LabelScope {
  kAll,            // minimum over every label
  kNonNegligible,  // only labels with f >= eps1, plus the predicted label
};

// Labels with at least this model probability count as "wrong but
// plausible" for the wrong-label completeness summary.
inline constexpr double kWrongLabelFloor = 0.01;

struct SampleScores {
  int predicted = 0;
  std::vector<double> f;
  std::vector<double> g;
  std::vector<double> alpha;
  std::vector<double> beta;
  double worst_alpha = 1.0;
  double worst_beta = 1.0;
  // Minimum alpha over labels other than the prediction with
  // f >= kWrongLabelFloor; empty when no such label exists.
  std::optional<double> wrong_label_alpha;
};

struct WorstCaseReport {
  double mean_alpha = 0.0;
  double mean_beta = 0.0;
  std::optional<double> mean_wrong_label_alpha;
  std::size_t wrong_label_samples = 0;
  std::vector<SampleScores> samples;
};

// Scores one image from its per-label model probabilities f and base-metric
// values g, taking worst cases over `labels` (all labels when empty).
SampleScores ScoreSample(std::span<const double> f, std::span<const double> g,
                         const MetricThresholds& thresholds,
                         std::span<const int> labels = {});

std::vector<int> LabelsInScope(std::span<const double> f, LabelScope scope,
                               const MetricThresholds& thresholds);

// Aggregates precomputed f and g tables ([image][label]).
WorstCaseReport AggregateWorstCase(const std::vector<std::vector<double>>& f,
                                   const std::vector<std::vector<double>>& g,
                                   const MetricThresholds& thresholds,
                                   LabelScope scope = LabelScope::kAll);

// Computes f and g = insertion AUC (gray fill) for every (image, label) and
// aggregates. `maps[k][a]` is the map for image k and label a.
WorstCaseReport WorstCaseMetrics(const MlpClassifier& model,
                                 std::span<const Image> images,
                                 const std::vector<std::vector<Grid>>& maps,
                                 const MetricThresholds& thresholds,
                                 LabelScope scope = LabelScope::kAll,
                                 int threads = 1);

struct BoundingBox {
  int row0 = 0;
  int col0 = 0;
  int row1 = 0;  // inclusive
  int col1 = 0;  // inclusive
  int Area() const { return (row1 - row0 + 1) * (col1 - col0 + 1); }
};

// Tightest box around pixels of `normalized` strictly above `threshold`;
// the whole grid when none are.
BoundingBox ThresholdBoundingBox(const Grid& normalized, double threshold);

struct SaliencyMetricResult {
  double value = 0.0;
  double area_fraction = 0.0;
  double probability = 0.0;
  bool probability_clamped = false;
  int predicted = 0;
  BoundingBox box;
};

// log(max(a, 0.05)) - log(p): a is the area fraction of the thresholded box,
// p the probability of the model's full-image prediction on the box crop
// resized back to the image size. Lower is better.
SaliencyMetricResult SaliencyMetric(const MlpClassifier& model, const Image& x,
                                    const Grid& normalized_map, double threshold);

std::vector<double> DefaultSaliencyThresholds();

struct ThresholdSearch {
  double threshold = 0.0;
  std::vector<double> candidates;
  std::vector<double> mean_metric;
};

// Grid search minimizing the mean saliency metric over a holdout set; ties go
// to the lowest threshold.
ThresholdSearch TuneSaliencyThreshold(
    const MlpClassifier& model, std::span<const Image> holdout,
    std::span<const Grid> normalized_maps,
    std::span<const double> candidates = {});

}  // namespace soundsal

#endif  // SOUNDSAL_METRICS_H_
