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

#include "soundsal/metrics.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "soundsal/error.h"
#include "soundsal/parallel.h"

namespace soundsal {

namespace {

constexpr double kAreaFloor = 0.05;
constexpr double kProbabilityFloor = 1e-9;

void CheckLabel(const MlpClassifier& model, int label) {
  if (label < 0 || label >= model.class_count) {
    throw InvalidArgument("label " + std::to_string(label) + " out of range for " +
                          std::to_string(model.class_count) + " classes");
  }
}

// Evaluation fills must be deterministic functions of x.
Image EvaluationFill(const Image& x, const FillStrategy& fill) {
  if (std::holds_alternative<RandomImageFill>(fill)) {
    throw InvalidArgument("evaluation curves accept only gray or blur fills");
  }
  RandomStream unused(0, 0);
  return DrawFill(x, fill, unused);
}

double ProbabilityOf(const MlpClassifier& model, const Image& image, int label,
                     ForwardTrace& trace) {
  ForwardInto(model, image.values(), trace);
  return trace.probabilities[label];
}

}  // namespace

void ValidateThresholds(const MetricThresholds& t) {
  if (!(t.eps1 >= 0.0 && t.eps1 <= 1.0) || !(t.eps2 >= 0.0 && t.eps2 <= 1.0)) {
    throw InvalidArgument("eps1 and eps2 must lie in [0, 1]");
  }
}

std::vector<int> RankPixels(const Grid& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return scores[a] > scores[b]; });
  return order;
}

Grid TopSBinarize(const Grid& scores, int count) {
  if (count < 0 || static_cast<std::size_t>(count) > scores.size()) {
    throw InvalidArgument("top-s count " + std::to_string(count) +
                          " outside [0, " + std::to_string(scores.size()) + "]");
  }
  Grid out(scores.height(), scores.width());
  const std::vector<int> order = RankPixels(scores);
  for (int k = 0; k < count; ++k) out[order[k]] = 1.0;
  return out;
}

CurveReport InsertionCurve(const MlpClassifier& model, const Image& x, int label,
                           const Grid& scores, const FillStrategy& fill) {
  CheckLabel(model, label);
  CheckSameShape(x, scores, "insertion map");
  const Image fill_image = EvaluationFill(x, fill);
  const std::vector<int> order = RankPixels(scores);
  const std::size_t n = x.size();
  CurveReport report;
  report.fill = DescribeFill(fill);
  ForwardTrace trace;
  report.start_probability = ProbabilityOf(model, x, label, trace);
  Image current = fill_image;
  double total = 0.0;
  for (std::size_t s = 1; s <= n; ++s) {
    const int pixel = order[s - 1];
    current[pixel] = x[pixel];
    const double p = ProbabilityOf(model, current, label, trace);
    report.retention.push_back(static_cast<double>(s) / n);
    report.probability.push_back(p);
    total += p;
  }
  report.auc = total / static_cast<double>(n);
  return report;
}

CurveReport DeletionCurve(const MlpClassifier& model, const Image& x, int label,
                          const Grid& scores, const FillStrategy& fill) {
  CheckLabel(model, label);
  CheckSameShape(x, scores, "deletion map");
  const Image fill_image = EvaluationFill(x, fill);
  const std::vector<int> order = RankPixels(scores);
  const std::size_t n = x.size();
  CurveReport report;
  report.fill = DescribeFill(fill);
  ForwardTrace trace;
  report.start_probability = ProbabilityOf(model, x, label, trace);
  Image current = x;
  double total = 0.0;
  for (std::size_t s = 1; s <= n; ++s) {
    const int pixel = order[s - 1];
    current[pixel] = fill_image[pixel];
    const double p = ProbabilityOf(model, current, label, trace);
    report.retention.push_back(static_cast<double>(n - s) / n);
    report.probability.push_back(p);
    total += p;
  }
  report.auc = total / static_cast<double>(n);
  return report;
}

double GAucSampled(const MlpClassifier& model, const Image& x, int label,
                   const Grid& scores, int samples, RandomStream& stream,
                   const FillStrategy& fill) {
  CheckLabel(model, label);
  CheckSameShape(x, scores, "sampled AUC map");
  if (samples <= 0) throw InvalidArgument("g_auc_sampled needs samples > 0");
  const Image fill_image = EvaluationFill(x, fill);
  const std::vector<int> order = RankPixels(scores);
  const std::size_t n = x.size();
  ForwardTrace trace;
  double total = 0.0;
  for (int k = 0; k < samples; ++k) {
    const std::size_t s = 1 + stream.NextBelow(n);
    Image modified = fill_image;
    for (std::size_t r = 0; r < s; ++r) modified[order[r]] = x[order[r]];
    total += ProbabilityOf(model, modified, label, trace);
  }
  return total / samples;
}

double CompletenessScore(double g, double f, double eps1) {
  if (!(f > 0.0)) {
    throw InvalidArgument("completeness is undefined for f(x, a) = 0");
  }
  return std::clamp(std::max(g, eps1) / f, 0.0, 1.0);
}

double SoundnessScore(double f, double g, double eps2) {
  if (g == 0.0) return 1.0;
  if (g < 0.0) throw InvalidArgument("base metric must be non-negative");
  return std::clamp(std::max(f, eps2) / g, 0.0, 1.0);
}

SampleScores ScoreSample(std::span<const double> f, std::span<const double> g,
                         const MetricThresholds& thresholds,
                         std::span<const int> labels) {
  ValidateThresholds(thresholds);
  if (f.size() != g.size() || f.empty()) {
    throw InvalidArgument("need one f and one g value per label");
  }
  SampleScores out;
  out.f.assign(f.begin(), f.end());
  out.g.assign(g.begin(), g.end());
  out.predicted = static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
  for (std::size_t a = 0; a < f.size(); ++a) {
    // A softmax can underflow to exactly zero; treat it as the smallest
    // positive probability so the ratio stays defined.
    const double fa = std::max(f[a], std::numeric_limits<double>::min());
    out.alpha.push_back(CompletenessScore(g[a], fa, thresholds.eps1));
    out.beta.push_back(SoundnessScore(f[a], g[a], thresholds.eps2));
  }
  std::vector<int> all;
  if (labels.empty()) {
    all.resize(f.size());
    std::iota(all.begin(), all.end(), 0);
    labels = all;
  }
  out.worst_alpha = 1.0;
  out.worst_beta = 1.0;
  for (int a : labels) {
    if (a < 0 || static_cast<std::size_t>(a) >= f.size()) {
      throw InvalidArgument("label subset entry out of range");
    }
    out.worst_alpha = std::min(out.worst_alpha, out.alpha[a]);
    out.worst_beta = std::min(out.worst_beta, out.beta[a]);
  }
  for (std::size_t a = 0; a < f.size(); ++a) {
    if (static_cast<int>(a) == out.predicted || f[a] < kWrongLabelFloor) continue;
    out.wrong_label_alpha = std::min(out.wrong_label_alpha.value_or(1.0), out.alpha[a]);
  }
  return out;
}

std::vector<int> LabelsInScope(std::span<const double> f, LabelScope scope,
                               const MetricThresholds& thresholds) {
  std::vector<int> labels;
  const int predicted =
      static_cast<int>(std::max_element(f.begin(), f.end()) - f.begin());
  for (std::size_t a = 0; a < f.size(); ++a) {
    if (scope == LabelScope::kAll || static_cast<int>(a) == predicted ||
        f[a] >= thresholds.eps1) {
      labels.push_back(static_cast<int>(a));
    }
  }
  return labels;
}

WorstCaseReport AggregateWorstCase(const std::vector<std::vector<double>>& f,
                                   const std::vector<std::vector<double>>& g,
                                   const MetricThresholds& thresholds,
                                   LabelScope scope) {
  if (f.size() != g.size()) throw InvalidArgument("f and g tables differ in size");
  if (f.empty()) throw InvalidArgument("worst-case metrics of an empty dataset");
  WorstCaseReport report;
  double wrong_total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    if (f[k].size() != g[k].size()) {
      throw InvalidArgument("missing maps for image " + std::to_string(k));
    }
    const std::vector<int> labels = LabelsInScope(f[k], scope, thresholds);
    SampleScores s = ScoreSample(f[k], g[k], thresholds, labels);
    report.mean_alpha += s.worst_alpha;
    report.mean_beta += s.worst_beta;
    if (s.wrong_label_alpha) {
      wrong_total += *s.wrong_label_alpha;
      ++report.wrong_label_samples;
    }
    report.samples.push_back(std::move(s));
  }
  report.mean_alpha /= static_cast<double>(f.size());
  report.mean_beta /= static_cast<double>(f.size());
  if (report.wrong_label_samples > 0) {
    report.mean_wrong_label_alpha =
        wrong_total / static_cast<double>(report.wrong_label_samples);
  }
  return report;
}

WorstCaseReport WorstCaseMetrics(const MlpClassifier& model,
                                 std::span<const Image> images,
                                 const std::vector<std::vector<Grid>>& maps,
                                 const MetricThresholds& thresholds,
                                 LabelScope scope, int threads) {
  ValidateThresholds(thresholds);
  if (maps.size() != images.size()) {
    throw InvalidArgument("missing maps: " + std::to_string(maps.size()) +
                          " map sets for " + std::to_string(images.size()) +
                          " images");
  }
  for (std::size_t k = 0; k < maps.size(); ++k) {
    if (maps[k].size() != static_cast<std::size_t>(model.class_count)) {
      throw InvalidArgument("missing maps for image " + std::to_string(k) + ": " +
                            std::to_string(maps[k].size()) + " of " +
                            std::to_string(model.class_count) + " labels");
    }
  }
  std::vector<std::vector<double>> f(images.size());
  std::vector<std::vector<double>> g(images.size());
  ParallelFor(images.size(), threads, [&](std::size_t k) {
    f[k] = Forward(model, images[k]);
    g[k].resize(model.class_count);
    for (int a = 0; a < model.class_count; ++a) {
      g[k][a] = InsertionCurve(model, images[k], a, maps[k][a]).auc;
    }
  });
  return AggregateWorstCase(f, g, thresholds, scope);
}

BoundingBox ThresholdBoundingBox(const Grid& normalized, double threshold) {
  BoundingBox box{normalized.height(), normalized.width(), -1, -1};
  for (int i = 0; i < normalized.height(); ++i) {
    for (int j = 0; j < normalized.width(); ++j) {
      if (normalized(i, j) > threshold) {
        box.row0 = std::min(box.row0, i);
        box.col0 = std::min(box.col0, j);
        box.row1 = std::max(box.row1, i);
        box.col1 = std::max(box.col1, j);
      }
    }
  }
  if (box.row1 < 0) {
    return {0, 0, normalized.height() - 1, normalized.width() - 1};
  }
  return box;
}

SaliencyMetricResult SaliencyMetric(const MlpClassifier& model, const Image& x,
                                    const Grid& normalized_map, double threshold) {
  if (!(threshold >= 0.0 && threshold < 1.0)) {
    throw InvalidArgument("saliency threshold must be in [0, 1)");
  }
  CheckSameShape(x, normalized_map, "saliency map");
  SaliencyMetricResult out;
  out.predicted = Predict(model, x);
  out.box = ThresholdBoundingBox(normalized_map, threshold);
  Grid crop(out.box.row1 - out.box.row0 + 1, out.box.col1 - out.box.col0 + 1);
  for (int i = 0; i < crop.height(); ++i) {
    for (int j = 0; j < crop.width(); ++j) {
      crop(i, j) = x(out.box.row0 + i, out.box.col0 + j);
    }
  }
  const Image resized = ResizeBilinear(crop, x.height(), x.width());
  out.area_fraction = static_cast<double>(out.box.Area()) / static_cast<double>(x.size());
  out.probability = Forward(model, resized)[out.predicted];
  double p = out.probability;
  if (p < kProbabilityFloor) {
    p = kProbabilityFloor;
    out.probability_clamped = true;
  }
  out.value = std::log(std::max(out.area_fraction, kAreaFloor)) - std::log(p);
  return out;
}

std::vector<double> DefaultSaliencyThresholds() {
  std::vector<double> out;
  for (int k = 0; k < 20; ++k) out.push_back(0.05 * k);
  return out;
}

ThresholdSearch TuneSaliencyThreshold(const MlpClassifier& model,
                                      std::span<const Image> holdout,
                                      std::span<const Grid> normalized_maps,
                                      std::span<const double> candidates) {
  if (holdout.empty()) throw InvalidArgument("threshold tuning needs a holdout set");
  if (holdout.size() != normalized_maps.size()) {
    throw InvalidArgument("need one map per holdout image");
  }
  ThresholdSearch search;
  if (candidates.empty()) {
    search.candidates = DefaultSaliencyThresholds();
  } else {
    search.candidates.assign(candidates.begin(), candidates.end());
    std::sort(search.candidates.begin(), search.candidates.end());
  }
  double best = std::numeric_limits<double>::infinity();
  for (double t : search.candidates) {
    double total = 0.0;
    for (std::size_t k = 0; k < holdout.size(); ++k) {
      total += SaliencyMetric(model, holdout[k], normalized_maps[k], t).value;
    }
    const double mean = total / static_cast<double>(holdout.size());
    search.mean_metric.push_back(mean);
    if (mean < best) {
      best = mean;
      search.threshold = t;
    }
  }
  return search;
}

}  // namespace soundsal
