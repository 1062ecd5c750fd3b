// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "commands.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <utility>

#include <CLI11.hpp>
#include <json.hpp>

#include "soundsal/dataset.h"
#include "soundsal/error.h"
#include "soundsal/grid.h"
#include "soundsal/heatmap_io.h"
#include "soundsal/kernels.h"
#include "soundsal/lintheory.h"
#include "soundsal/masker.h"
#include "soundsal/metrics.h"
#include "soundsal/mlp.h"
#include "soundsal/parallel.h"
#include "soundsal/random.h"
#include "soundsal/stats.h"

namespace soundsal::cli {
namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

constexpr char kManifestName[] = "manifest.json";

// Raised when a command is pointed at a directory that lacks some of the
// files it needs; the CLI lists every gap at once.
class MissingInputsError : public Error {
 public:
  MissingInputsError(const std::string& what, std::vector<std::string> missing)
      : Error(what), missing_(std::move(missing)) {}
  const std::vector<std::string>& missing() const { return missing_; }

 private:
  std::vector<std::string> missing_;
};

struct GlobalOptions {
  std::string kernels = "auto";
  int threads = 0;

  int ThreadCount() const { return threads > 0 ? threads : DefaultThreadCount(); }
};

// ---------------------------------------------------------------------------
// Small output helpers.

std::string Fmt(double v) {
  char buffer[64];
  const auto res = std::to_chars(buffer, buffer + sizeof(buffer), v);
  return std::string(buffer, res.ptr);
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("write to " + path.string() + " failed");
}

std::string ReadText(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void PrepareOutputDir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw IoError("cannot create output directory " + dir.string());
  }
}

std::string AbsolutePath(const std::string& path) {
  if (path.empty()) return path;
  return fs::absolute(path).lexically_normal().string();
}

std::vector<std::string> ListOutputs(const fs::path& dir) {
  std::vector<std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), dir).generic_string();
    if (rel != kManifestName) files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  return files;
}

// ---------------------------------------------------------------------------
// Flag registration that remembers every resolved value for the manifest.

class Flags {
 public:
  explicit Flags(CLI::App* app) : app_(app) {}

  template <typename T>
  CLI::Option* Value(const std::string& name, T& ref, const std::string& help) {
    record_.push_back([&ref, name](Json& j) { j[name] = ref; });
    return app_->add_option("--" + name, ref, help)->capture_default_str();
  }

  CLI::Option* List(const std::string& name, std::vector<int>& ref,
                    const std::string& help) {
    record_.push_back([&ref, name](Json& j) { j[name] = ref; });
    return app_->add_option("--" + name, ref, help)->delimiter(',')->capture_default_str();
  }

  // Paths are recorded in absolute form so a manifest replays from anywhere.
  CLI::Option* Path(const std::string& name, std::string& ref, const std::string& help) {
    record_.push_back([&ref, name](Json& j) { j[name] = AbsolutePath(ref); });
    return app_->add_option("--" + name, ref, help);
  }

  CLI::Option* Flag(const std::string& name, bool& ref, const std::string& help) {
    record_.push_back([&ref, name](Json& j) { j[name] = ref; });
    return app_->add_flag("--" + name, ref, help);
  }

  Json Config() const {
    Json j = Json::object();
    for (const auto& r : record_) r(j);
    return j;
  }

 private:
  CLI::App* app_;
  std::vector<std::function<void(Json&)>> record_;
};

void WriteManifest(const fs::path& out, const std::string& command,
                   const Json& config, std::uint64_t seed, Json results) {
  Json m;
  m["tool"] = kToolName;
  m["version"] = kToolVersion;
  m["command"] = command;
  m["kernels"] = std::string(kernels::BackendName(kernels::ActiveBackend()));
  m["seed"] = seed;
  m["config"] = config;
  m["outputs"] = ListOutputs(out);
  m["results"] = std::move(results);
  WriteText(out / kManifestName, m.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Shared parsing.

// "gray", "gray:0.4", "blur", "blur:1.5" or "random_image".
FillStrategy ParseFill(const std::string& text, const LabeledDataset* pool) {
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  std::optional<double> arg;
  if (colon != std::string::npos) {
    const std::string rest = text.substr(colon + 1);
    double v = 0.0;
    const auto res = std::from_chars(rest.data(), rest.data() + rest.size(), v);
    if (res.ec != std::errc() || res.ptr != rest.data() + rest.size()) {
      throw InvalidArgument("bad fill parameter in '" + text + "'");
    }
    arg = v;
  }
  FillStrategy fill;
  if (kind == "gray") {
    fill = GrayFill{arg.value_or(0.5)};
  } else if (kind == "blur") {
    fill = BlurFill{arg.value_or(1.0)};
  } else if (kind == "random_image" && !arg) {
    if (pool == nullptr) throw InvalidArgument("random_image fill needs --pool");
    fill = RandomImageFill{pool, {}};
  } else {
    throw InvalidArgument("unknown fill '" + text + "'");
  }
  ValidateFill(fill);
  return fill;
}

bool SameFile(const std::string& a, const std::string& b) {
  std::error_code ec;
  return fs::equivalent(a, b, ec) && !ec;
}

void CheckModelMatches(const MlpClassifier& model, const LabeledDataset& data,
                       const std::string& data_path) {
  if (model.input_dim != data.height * data.width ||
      model.class_count != data.class_count) {
    throw DimensionError(data_path + ": dataset is " + std::to_string(data.height) +
                         "x" + std::to_string(data.width) + " with " +
                         std::to_string(data.class_count) +
                         " classes, model expects input " +
                         std::to_string(model.input_dim) + " and " +
                         std::to_string(model.class_count) + " classes");
  }
}

std::size_t LimitCount(const LabeledDataset& data, int limit) {
  if (limit < 0) throw InvalidArgument("--limit must be non-negative");
  return limit == 0 ? data.size() : std::min<std::size_t>(data.size(), limit);
}

std::string MapStem(std::size_t sample, int label) {
  return std::to_string(sample) + "_" + std::to_string(label);
}

double TopFractionIou(const Grid& a, const Grid& b, double fraction) {
  const int count = static_cast<int>(std::lround(fraction * static_cast<double>(a.size())));
  const Grid ta = TopSBinarize(a, count);
  const Grid tb = TopSBinarize(b, count);
  int both = 0;
  int either = 0;
  for (std::size_t p = 0; p < a.size(); ++p) {
    both += ta[p] > 0.5 && tb[p] > 0.5;
    either += ta[p] > 0.5 || tb[p] > 0.5;
  }
  return either == 0 ? 1.0 : static_cast<double>(both) / either;
}

Json IntervalJson(const MeanInterval& m) {
  return Json{{"mean", m.mean}, {"ci_low", m.ci_low}, {"ci_high", m.ci_high},
              {"count", m.count}};
}

// ---------------------------------------------------------------------------
// Commands. Each registers its flags on a subcommand and runs after parsing.

class Command {
 public:
  virtual ~Command() = default;
  virtual void Run(const GlobalOptions& global) = 0;
  CLI::App* app() const { return app_; }

 protected:
  CLI::App* app_ = nullptr;
};

class GenDataCommand : public Command {
 public:
  explicit GenDataCommand(CLI::App& parent) {
    app_ = parent.add_subcommand("gen-data", "generate train/test/holdout shape datasets");
    Flags f(app_);
    f.Path("out", out_, "output directory")->required();
    f.Value("height", height_, "image height");
    f.Value("width", width_, "image width");
    f.Value("classes", classes_, "number of shape classes");
    f.Value("train", train_, "training samples");
    f.Value("test", test_, "test samples");
    f.Value("holdout", holdout_, "holdout samples");
    f.Value("fg-min", fg_min_, "lowest foreground intensity");
    f.Value("fg-max", fg_max_, "highest foreground intensity");
    f.Value("noise", noise_, "background noise amplitude");
    f.Value("seed", seed_, "master seed");
    f.Flag("two-object", two_object_, "two shapes of distinct classes per image");
    flags_ = std::make_unique<Flags>(f);
  }

  void Run(const GlobalOptions&) override {
    PrepareOutputDir(out_);
    Json results = Json::object();
    const std::pair<const char*, std::pair<int, Split>> splits[] = {
        {"train", {train_, Split::kTrain}},
        {"test", {test_, Split::kTest}},
        {"holdout", {holdout_, Split::kHoldout}}};
    for (const auto& [name, spec] : splits) {
      ShapesConfig cfg;
      cfg.height = height_;
      cfg.width = width_;
      cfg.class_count = classes_;
      cfg.samples = spec.first;
      cfg.split = spec.second;
      cfg.foreground_min = fg_min_;
      cfg.foreground_max = fg_max_;
      cfg.noise_amplitude = noise_;
      cfg.seed = seed_;
      const LabeledDataset data = two_object_ ? GenerateTwoObject(cfg) : GenerateShapes(cfg);
      SaveDataset(data, (fs::path(out_) / (std::string(name) + ".ssds")).string());
      std::vector<int> per_class(classes_, 0);
      for (int label : data.labels) ++per_class[label];
      results[name] = Json{{"samples", data.size()}, {"class_counts", per_class}};
    }
    WriteManifest(out_, "gen-data", flags_->Config(), seed_, std::move(results));
  }

 private:
  std::string out_;
  int height_ = 16;
  int width_ = 16;
  int classes_ = 4;
  int train_ = 16000;
  int test_ = 1000;
  int holdout_ = 100;
  double fg_min_ = 0.6;
  double fg_max_ = 1.0;
  double noise_ = 0.3;
  std::uint64_t seed_ = 1;
  bool two_object_ = false;
  std::unique_ptr<Flags> flags_;
};

class TrainCommand : public Command {
 public:
  explicit TrainCommand(CLI::App& parent) {
    app_ = parent.add_subcommand("train", "train the one-hidden-layer classifier");
    Flags f(app_);
    f.Path("data", data_, "training dataset (.ssds)")->required();
    f.Path("test", test_, "held-out dataset for the accuracy report");
    f.Path("out", out_, "output directory")->required();
    f.Value("hidden", hidden_, "hidden units");
    f.Value("epochs", cfg_.epochs, "training epochs");
    f.Value("batch-size", cfg_.batch_size, "minibatch size");
    f.Value("lr", cfg_.learning_rate, "SGD learning rate");
    f.Value("seed", cfg_.seed, "initialization and shuffling seed");
    flags_ = std::make_unique<Flags>(f);
  }

  void Run(const GlobalOptions&) override {
    const LabeledDataset train = LoadDataset(data_, Split::kTrain);
    std::optional<LabeledDataset> test;
    if (!test_.empty()) {
      test = LoadDataset(test_, Split::kTest);
      if (test->height != train.height || test->width != train.width ||
          test->class_count != train.class_count) {
        throw DimensionError("test dataset " + test_ + " does not match the training dimensions");
      }
    }
    PrepareOutputDir(out_);
    const MlpClassifier init = MlpClassifier::Initialize(
        train.height * train.width, hidden_, train.class_count, cfg_.seed);
    const TrainResult result = Train(init, train, cfg_);
    SaveModel(result.model, (fs::path(out_) / "model.ssmf").string());
    std::string csv = "epoch,loss\n";
    for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
      csv += std::to_string(e + 1) + "," + Fmt(result.epoch_loss[e]) + "\n";
    }
    WriteText(fs::path(out_) / "loss.csv", csv);
    Json results{{"final_loss", result.epoch_loss.back()},
                 {"train_accuracy", Accuracy(result.model, train)}};
    if (test) results["test_accuracy"] = Accuracy(result.model, *test);
    WriteManifest(out_, "train", flags_->Config(), cfg_.seed, std::move(results));
  }

 private:
  std::string data_;
  std::string test_;
  std::string out_;
  int hidden_ = 64;
  TrainConfig cfg_;
  std::unique_ptr<Flags> flags_;
};

class MaskCommand : public Command {
 public:
  explicit MaskCommand(CLI::App& parent) {
    app_ = parent.add_subcommand("mask", "compute saliency maps for every image and label");
    Flags f(app_);
    f.Path("model", model_, "trained model (.ssmf)")->required();
    f.Path("data", data_, "images to explain (.ssds)")->required();
    f.Path("pool", pool_, "distractor pool for random_image fills (.ssds)");
    f.Path("out", out_, "output directory")->required();
    f.Value("method", method_, "mask | gradinput | random | gaussian")
        ->check(CLI::IsMember({"mask", "gradinput", "random", "gaussian"}));
    f.Value("labels", labels_, "all | predicted")->check(CLI::IsMember({"all", "predicted"}));
    f.Value("lambda-tv", cfg_.lambda_tv, "total variation weight");
    f.Value("lambda-l1", cfg_.lambda_l1, "L1 weight");
    f.Value("scale", cfg_.scale, "upsampling factor");
    f.Value("fill", fill_, "random_image | gray[:level] | blur[:sigma]");
    f.Value("steps", cfg_.steps, "Adam steps");
    f.Value("lr", cfg_.learning_rate, "Adam learning rate");
    f.Value("distractors", cfg_.distractors_per_step, "distractors per step");
    f.Value("seed", cfg_.seed, "master seed");
    f.Value("gaussian-sigma", gaussian_sigma_, "std of the centered Gaussian, as a fraction of the side");
    f.Value("limit", limit_, "only the first N images (0 = all)");
    flags_ = std::make_unique<Flags>(f);
  }

  void Run(const GlobalOptions& global) override {
    const MlpClassifier model = LoadModel(model_);
    const LabeledDataset data = LoadDataset(data_);
    CheckModelMatches(model, data, data_);
    std::optional<LabeledDataset> pool;
    if (!pool_.empty()) pool = LoadDataset(pool_, Split::kTrain);
    cfg_.fill = ParseFill(fill_, pool ? &*pool : nullptr);
    if (method_ == "mask") ValidateMaskConfig(cfg_, data.height, data.width);
    const bool exclude_self = pool && SameFile(pool_, data_);
    PrepareOutputDir(out_);

    const std::size_t count = LimitCount(data, limit_);
    struct Job {
      std::size_t sample;
      int label;
    };
    std::vector<Job> jobs;
    for (std::size_t k = 0; k < count; ++k) {
      if (labels_ == "all") {
        for (int a = 0; a < data.class_count; ++a) jobs.push_back({k, a});
      } else {
        jobs.push_back({k, Predict(model, data.images[k])});
      }
    }
    std::vector<Heatmap> maps(jobs.size());
    std::vector<double> final_objective(jobs.size(), 0.0);
    ParallelFor(jobs.size(), global.ThreadCount(), [&](std::size_t i) {
      const auto [k, a] = jobs[i];
      const Image& x = data.images[k];
      const std::uint64_t task = LabelTaskId(k, a);
      if (method_ == "mask") {
        MaskConfig cfg = cfg_;
        if (exclude_self) std::get<RandomImageFill>(cfg.fill).exclude = k;
        MaskResult r = LearnMask(model, x, a, cfg, task);
        final_objective[i] = r.heldout_objective.back();
        maps[i] = std::move(r.heatmap);
      } else if (method_ == "gradinput") {
        maps[i] = GradientInputMap(model, x, a);
      } else if (method_ == "random") {
        RandomStream stream(cfg_.seed, task);
        maps[i] = RandomMap(data.height, data.width, stream);
      } else {
        maps[i] = CenteredGaussianMap(data.height, data.width, gaussian_sigma_);
      }
    });
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      const fs::path stem = fs::path(out_) / MapStem(jobs[i].sample, jobs[i].label);
      WriteGridCsv(maps[i].raw(), stem.string() + ".csv");
      WritePgm(maps[i], stem.string() + ".pgm");
    }
    Json results{{"images", count}, {"maps", jobs.size()}, {"fill", DescribeFill(cfg_.fill)}};
    if (method_ == "mask" && !jobs.empty()) {
      double sum = 0.0;
      for (double v : final_objective) sum += v;
      results["mean_final_heldout_objective"] = sum / static_cast<double>(jobs.size());
    }
    WriteManifest(out_, "mask", flags_->Config(), cfg_.seed, std::move(results));
  }

 private:
  std::string model_;
  std::string data_;
  std::string pool_;
  std::string out_;
  std::string method_ = "mask";
  std::string labels_ = "all";
  std::string fill_ = "random_image";
  double gaussian_sigma_ = 0.25;
  int limit_ = 0;
  MaskConfig cfg_;
  std::unique_ptr<Flags> flags_;
};

class EvalCommand : public Command {
 public:
  explicit EvalCommand(CLI::App& parent) {
    app_ = parent.add_subcommand("eval", "score saliency maps");
    Flags f(app_);
    f.Path("model", model_, "trained model (.ssmf)")->required();
    f.Path("data", data_, "images the maps explain (.ssds)")->required();
    f.Path("maps", maps_, "directory of <sample>_<label>.csv maps")->required();
    f.Path("out", out_, "output directory")->required();
    f.Value("eps1", thresholds_.eps1, "completeness floor");
    f.Value("eps2", thresholds_.eps2, "soundness floor");
    f.Value("fill", fill_, "gray[:level] | blur[:sigma] for the insertion/deletion curves");
    f.Value("metrics", metrics_, "comma list of insertion, deletion, saliency, cs");
    f.Value("labels", labels_, "all | predicted")->check(CLI::IsMember({"all", "predicted"}));
    f.Value("scope", scope_, "worst case over all | nonnegligible labels")
        ->check(CLI::IsMember({"all", "nonnegligible"}));
    f.Flag("cheating", cheating_, "use the predicted label's map for every label");
    f.Value("saliency-threshold", saliency_threshold_, "threshold on normalized maps");
    f.Path("tune-data", tune_data_, "holdout images for tuning the saliency threshold");
    f.Path("tune-maps", tune_maps_, "maps for the tuning images");
    f.Flag("curves", curves_, "also write per-map insertion/deletion curves");
    f.Value("limit", limit_, "only the first N images (0 = all)");
    flags_ = std::make_unique<Flags>(f);
  }

  void Run(const GlobalOptions& global) override {
    ValidateThresholds(thresholds_);
    const std::set<std::string> wanted = ParseMetrics();
    const bool want_cs = wanted.contains("cs");
    if (want_cs && labels_ != "all") throw InvalidArgument("the cs metric needs --labels all");
    if (cheating_ && labels_ != "all") throw InvalidArgument("--cheating needs --labels all");
    const FillStrategy fill = ParseFill(fill_, nullptr);

    const MlpClassifier model = LoadModel(model_);
    const LabeledDataset data = LoadDataset(data_);
    CheckModelMatches(model, data, data_);
    const std::size_t count = LimitCount(data, limit_);
    const int classes = data.class_count;

    std::vector<int> predicted(count);
    for (std::size_t k = 0; k < count; ++k) predicted[k] = Predict(model, data.images[k]);
    std::vector<std::vector<int>> labels(count);
    for (std::size_t k = 0; k < count; ++k) {
      if (labels_ == "all") {
        for (int a = 0; a < classes; ++a) labels[k].push_back(a);
      } else {
        labels[k].push_back(predicted[k]);
      }
    }
    std::vector<std::vector<Grid>> maps = LoadMaps(maps_, data, labels);
    if (cheating_) {
      for (std::size_t k = 0; k < count; ++k) {
        std::vector<Heatmap> h(maps[k].begin(), maps[k].end());
        const std::vector<Heatmap> c = CheatingVariant(h, predicted[k]);
        for (int a = 0; a < classes; ++a) maps[k][a] = c[a].raw();
      }
    }

    double threshold = saliency_threshold_;
    Json tuning = nullptr;
    if (wanted.contains("saliency") && !tune_data_.empty()) {
      if (tune_maps_.empty()) throw InvalidArgument("--tune-data needs --tune-maps");
      const LabeledDataset holdout = LoadDataset(tune_data_, Split::kHoldout);
      CheckModelMatches(model, holdout, tune_data_);
      std::vector<std::vector<int>> tune_labels(holdout.size());
      for (std::size_t k = 0; k < holdout.size(); ++k) {
        tune_labels[k] = {Predict(model, holdout.images[k])};
      }
      const auto tune_maps = LoadMaps(tune_maps_, holdout, tune_labels);
      std::vector<Grid> normalized;
      for (const auto& m : tune_maps) normalized.push_back(Heatmap(m[0]).Normalized());
      const ThresholdSearch search = TuneSaliencyThreshold(model, holdout.images, normalized);
      threshold = search.threshold;
      tuning = Json{{"candidates", search.candidates}, {"mean_metric", search.mean_metric}};
    }

    struct Row {
      double g = 0.0;
      std::optional<double> insertion;
      std::optional<double> deletion;
      std::optional<double> saliency;
      std::optional<CurveReport> insertion_curve;
      std::optional<CurveReport> deletion_curve;
    };
    std::vector<std::vector<double>> f(count);
    std::vector<std::vector<Row>> rows(count);
    const bool gray_fill = std::holds_alternative<GrayFill>(fill) &&
                           std::get<GrayFill>(fill).level == GrayFill{}.level;
    ParallelFor(count, global.ThreadCount(), [&](std::size_t k) {
      const Image& x = data.images[k];
      f[k] = Forward(model, x);
      for (std::size_t i = 0; i < labels[k].size(); ++i) {
        const int a = labels[k][i];
        const Grid& map = maps[k][cheating_ ? a : i];
        Row row;
        CurveReport base = InsertionCurve(model, x, a, map);
        row.g = base.auc;
        if (wanted.contains("insertion")) {
          CurveReport ins = gray_fill ? std::move(base) : InsertionCurve(model, x, a, map, fill);
          row.insertion = ins.auc;
          if (curves_) row.insertion_curve = std::move(ins);
        }
        if (wanted.contains("deletion")) {
          CurveReport del = DeletionCurve(model, x, a, map, fill);
          row.deletion = del.auc;
          if (curves_) row.deletion_curve = std::move(del);
        }
        if (wanted.contains("saliency")) {
          row.saliency = SaliencyMetric(model, x, Heatmap(map).Normalized(), threshold).value;
        }
        rows[k].push_back(std::move(row));
      }
    });

    std::optional<WorstCaseReport> worst;
    if (want_cs) {
      std::vector<std::vector<double>> g(count);
      for (std::size_t k = 0; k < count; ++k) {
        for (const Row& r : rows[k]) g[k].push_back(r.g);
      }
      worst = AggregateWorstCase(f, g, thresholds_,
                                 scope_ == "all" ? LabelScope::kAll : LabelScope::kNonNegligible);
    }

    PrepareOutputDir(out_);
    if (curves_) PrepareOutputDir(fs::path(out_) / "curves");
    std::string csv =
        "sample_id,label,f,g_auc,alpha,beta,insertion_auc,deletion_auc,saliency_metric\n";
    std::map<std::string, std::pair<double, std::size_t>> sums;
    auto cell = [&](const std::string& column, std::optional<double> v) {
      if (!v) return std::string();
      auto& s = sums[column];
      s.first += *v;
      ++s.second;
      return Fmt(*v);
    };
    for (std::size_t k = 0; k < count; ++k) {
      for (std::size_t i = 0; i < labels[k].size(); ++i) {
        const int a = labels[k][i];
        const Row& r = rows[k][i];
        std::optional<double> alpha;
        std::optional<double> beta;
        if (worst) {
          alpha = worst->samples[k].alpha[a];
          beta = worst->samples[k].beta[a];
        }
        csv += std::to_string(k) + "," + std::to_string(a) + "," + cell("f", f[k][a]) + "," +
               cell("g_auc", r.g) + "," + cell("alpha", alpha) + "," + cell("beta", beta) +
               "," + cell("insertion_auc", r.insertion) + "," +
               cell("deletion_auc", r.deletion) + "," + cell("saliency_metric", r.saliency) +
               "\n";
        if (curves_) {
          const std::string stem = MapStem(k, a);
          if (r.insertion_curve) WriteCurve(stem + "_insertion.csv", *r.insertion_curve);
          if (r.deletion_curve) WriteCurve(stem + "_deletion.csv", *r.deletion_curve);
        }
      }
    }
    WriteText(fs::path(out_) / "report.csv", csv);

    Json means = Json::object();
    for (const auto& [column, s] : sums) means[column] = s.first / static_cast<double>(s.second);
    Json summary;
    summary["samples"] = count;
    summary["cheating"] = cheating_;
    summary["means"] = means;
    if (worst) {
      summary["worst_case"] = Json{
          {"scope", scope_},
          {"mean_alpha", worst->mean_alpha},
          {"mean_beta", worst->mean_beta},
          {"mean_wrong_label_alpha", worst->mean_wrong_label_alpha
                                         ? Json(*worst->mean_wrong_label_alpha)
                                         : Json(nullptr)},
          {"wrong_label_samples", worst->wrong_label_samples}};
    }
    if (wanted.contains("saliency")) {
      summary["saliency_threshold"] = threshold;
      if (!tuning.is_null()) summary["saliency_tuning"] = tuning;
    }
    Json with_config = summary;
    // The output directory is left out so the file does not depend on it.
    with_config["config"] = flags_->Config();
    with_config["config"].erase("out");
    WriteText(fs::path(out_) / "summary.json", with_config.dump(2) + "\n");
    WriteManifest(out_, "eval", flags_->Config(), 0, std::move(summary));
  }

 private:
  std::set<std::string> ParseMetrics() const {
    static const std::set<std::string> known = {"insertion", "deletion", "saliency", "cs"};
    std::set<std::string> out;
    std::stringstream ss(metrics_);
    std::string item;
    while (std::getline(ss, item, ',')) {
      if (!known.contains(item)) throw InvalidArgument("unknown metric '" + item + "'");
      out.insert(item);
    }
    if (out.empty()) throw InvalidArgument("--metrics is empty");
    return out;
  }

  static std::vector<std::vector<Grid>> LoadMaps(const std::string& dir,
                                                 const LabeledDataset& data,
                                                 const std::vector<std::vector<int>>& labels) {
    std::vector<std::string> missing;
    std::vector<std::vector<Grid>> maps(labels.size());
    for (std::size_t k = 0; k < labels.size(); ++k) {
      for (int a : labels[k]) {
        const fs::path path = fs::path(dir) / (MapStem(k, a) + ".csv");
        if (!fs::exists(path)) {
          missing.push_back(path.filename().string());
          continue;
        }
        Grid g = ReadGridCsv(path.string());
        if (g.height() != data.height || g.width() != data.width) {
          throw DimensionError(path.string() + " does not match the image size");
        }
        maps[k].push_back(std::move(g));
      }
    }
    if (!missing.empty()) {
      const std::string what = std::to_string(missing.size()) + " map file(s) missing in " + dir;
      throw MissingInputsError(what, std::move(missing));
    }
    return maps;
  }

  void WriteCurve(const std::string& name, const CurveReport& curve) const {
    std::string csv = "retention_fraction,probability\n";
    for (std::size_t s = 0; s < curve.probability.size(); ++s) {
      csv += Fmt(curve.retention[s]) + "," + Fmt(curve.probability[s]) + "\n";
    }
    WriteText(fs::path(out_) / "curves" / name, csv);
  }

  std::string model_;
  std::string data_;
  std::string maps_;
  std::string out_;
  MetricThresholds thresholds_;
  std::string fill_ = "gray";
  std::string metrics_ = "insertion,deletion,saliency,cs";
  std::string labels_ = "all";
  std::string scope_ = "all";
  bool cheating_ = false;
  double saliency_threshold_ = 0.5;
  std::string tune_data_;
  std::string tune_maps_;
  bool curves_ = false;
  int limit_ = 0;
  std::unique_ptr<Flags> flags_;
};

class LinTheoryCommand : public Command {
 public:
  explicit LinTheoryCommand(CLI::App& parent) {
    app_ = parent.add_subcommand("lintheory", "interval certificates on linear models");
    Flags f(app_);
    f.Path("out", out_, "output directory")->required();
    f.Value("d", dimension_, "dimension");
    f.Value("gamma", gamma_, "margin");
    f.List("L-list", lengths_, "comma-separated interval lengths");
    f.Value("trials", trials_, "number of trials");
    f.Value("seed", seed_, "master seed");
    flags_ = std::make_unique<Flags>(f);
  }

  void Run(const GlobalOptions& global) override {
    if (trials_ == 0) throw InvalidArgument("--trials must be positive");
    const TheoremExperimentResult result =
        TheoremExperiment(dimension_, gamma_, lengths_, trials_, seed_, global.ThreadCount());
    PrepareOutputDir(out_);
    std::string csv =
        "L,completeness_freq,completeness_ci_low,completeness_ci_high,"
        "soundness_violation_freq,soundness_violation_ci_low,soundness_violation_ci_high,"
        "greedy_violation_freq,greedy_violation_ci_low,greedy_violation_ci_high\n";
    for (const TheoremRow& row : result.rows) {
      csv += std::to_string(row.length);
      for (const Proportion& p :
           {row.completeness, row.soundness_violation, row.greedy_violation}) {
        csv += "," + Fmt(p.value) + "," + Fmt(p.ci_low) + "," + Fmt(p.ci_high);
      }
      csv += "\n";
    }
    WriteText(fs::path(out_) / "lintheory.csv", csv);
    Json results{{"trials", result.trials},
                 {"sampling_attempts", result.sampling_attempts},
                 {"acceptance_rate", static_cast<double>(result.trials) /
                                         static_cast<double>(result.sampling_attempts)}};
    WriteManifest(out_, "lintheory", flags_->Config(), seed_, std::move(results));
  }

 private:
  std::string out_;
  int dimension_ = 1024;
  double gamma_ = 0.1;
  std::vector<int> lengths_ = {8, 16, 32, 64, 128, 256, 512};
  std::uint64_t trials_ = 1000;
  std::uint64_t seed_ = 1;
  std::unique_ptr<Flags> flags_;
};

class SanityCommand : public Command {
 public:
  explicit SanityCommand(CLI::App& parent) {
    app_ = parent.add_subcommand(
        "sanity", "compare masks of the trained model with a last-layer-randomized copy");
    Flags f(app_);
    f.Path("model", model_, "trained model (.ssmf)")->required();
    f.Path("data", data_, "images (.ssds)")->required();
    f.Path("pool", pool_, "distractor pool for random_image fills (.ssds)");
    f.Path("out", out_, "output directory")->required();
    f.Value("seed", seed_, "master seed; the rerun uses seed + 1");
    f.Value("limit", limit_, "only the first N images (0 = all)");
    f.Value("lambda-tv", cfg_.lambda_tv, "total variation weight");
    f.Value("lambda-l1", cfg_.lambda_l1, "L1 weight");
    f.Value("scale", cfg_.scale, "upsampling factor");
    f.Value("fill", fill_, "random_image | gray[:level] | blur[:sigma]");
    f.Value("steps", cfg_.steps, "Adam steps");
    f.Value("top-fraction", top_fraction_, "fraction of pixels compared by IoU");
    flags_ = std::make_unique<Flags>(f);
  }

  void Run(const GlobalOptions& global) override {
    const MlpClassifier model = LoadModel(model_);
    const LabeledDataset data = LoadDataset(data_);
    CheckModelMatches(model, data, data_);
    std::optional<LabeledDataset> pool;
    if (!pool_.empty()) pool = LoadDataset(pool_, Split::kTrain);
    cfg_.fill = ParseFill(fill_, pool ? &*pool : nullptr);
    ValidateMaskConfig(cfg_, data.height, data.width);
    if (!(top_fraction_ > 0.0 && top_fraction_ <= 1.0)) {
      throw InvalidArgument("--top-fraction must lie in (0, 1]");
    }
    const bool exclude_self = pool && SameFile(pool_, data_);
    const MlpClassifier randomized = RandomizeLastLayer(model, seed_);
    const std::size_t count = LimitCount(data, limit_);

    struct Outcome {
      int label = 0;
      double iou_randomized = 0.0;
      double iou_rerun = 0.0;
      double auc_trained = 0.0;
      double auc_randomized = 0.0;
      bool randomized_valid = true;
    };
    std::vector<Outcome> out(count);
    ParallelFor(count, global.ThreadCount(), [&](std::size_t k) {
      const Image& x = data.images[k];
      const int label = Predict(model, x);
      MaskConfig cfg = cfg_;
      cfg.seed = seed_;
      if (exclude_self) std::get<RandomImageFill>(cfg.fill).exclude = k;
      const std::uint64_t task = LabelTaskId(k, label);
      const Grid trained = LearnMask(model, x, label, cfg, task).heatmap.raw();
      const Grid on_random = LearnMask(randomized, x, label, cfg, task).heatmap.raw();
      MaskConfig rerun_cfg = cfg;
      rerun_cfg.seed = seed_ + 1;
      const Grid rerun = LearnMask(model, x, label, rerun_cfg, task).heatmap.raw();
      Outcome& o = out[k];
      o.label = label;
      o.iou_randomized = TopFractionIou(trained, on_random, top_fraction_);
      o.iou_rerun = TopFractionIou(trained, rerun, top_fraction_);
      o.auc_trained = InsertionCurve(model, x, label, trained).auc;
      o.auc_randomized = InsertionCurve(randomized, x, label, on_random).auc;
      double total = 0.0;
      for (double p : Forward(randomized, x)) {
        o.randomized_valid = o.randomized_valid && p >= 0.0 && p <= 1.0;
        total += p;
      }
      o.randomized_valid = o.randomized_valid && std::abs(total - 1.0) < 1e-9;
    });

    PrepareOutputDir(out_);
    std::string csv =
        "sample_id,label,iou_trained_randomized,iou_trained_rerun,"
        "insertion_auc_trained,insertion_auc_randomized\n";
    std::vector<double> iou_randomized;
    std::vector<double> iou_rerun;
    double auc_trained = 0.0;
    double auc_randomized = 0.0;
    bool valid = true;
    for (std::size_t k = 0; k < count; ++k) {
      const Outcome& o = out[k];
      csv += std::to_string(k) + "," + std::to_string(o.label) + "," + Fmt(o.iou_randomized) +
             "," + Fmt(o.iou_rerun) + "," + Fmt(o.auc_trained) + "," +
             Fmt(o.auc_randomized) + "\n";
      iou_randomized.push_back(o.iou_randomized);
      iou_rerun.push_back(o.iou_rerun);
      auc_trained += o.auc_trained;
      auc_randomized += o.auc_randomized;
      valid = valid && o.randomized_valid;
    }
    WriteText(fs::path(out_) / "sanity.csv", csv);
    const double n = static_cast<double>(std::max<std::size_t>(count, 1));
    double mean_iou_randomized = 0.0;
    double mean_iou_rerun = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
      mean_iou_randomized += iou_randomized[k] / n;
      mean_iou_rerun += iou_rerun[k] / n;
    }
    Json results{{"images", count},
                 {"mean_iou_trained_randomized", mean_iou_randomized},
                 {"mean_iou_trained_rerun", mean_iou_rerun},
                 {"mean_insertion_auc_trained", auc_trained / n},
                 {"mean_insertion_auc_randomized", auc_randomized / n},
                 {"randomized_outputs_valid", valid},
                 {"trained_accuracy", Accuracy(model, data)},
                 {"randomized_accuracy", Accuracy(randomized, data)}};
    if (count >= 2) {
      results["iou_rerun_minus_randomized"] =
          IntervalJson(PairedDifference(iou_randomized, iou_rerun));
    }
    WriteText(fs::path(out_) / "summary.json", results.dump(2) + "\n");
    WriteManifest(out_, "sanity", flags_->Config(), seed_, std::move(results));
  }

 private:
  std::string model_;
  std::string data_;
  std::string pool_;
  std::string out_;
  std::uint64_t seed_ = 1;
  int limit_ = 100;
  std::string fill_ = "random_image";
  double top_fraction_ = 0.3;
  MaskConfig cfg_;
  std::unique_ptr<Flags> flags_;
};

class ReplayCommand : public Command {
 public:
  explicit ReplayCommand(CLI::App& parent) {
    app_ = parent.add_subcommand("replay", "re-run the command recorded in a manifest");
    app_->add_option("--manifest", manifest_, "manifest.json to replay")->required();
    app_->add_option("--out", out_, "write outputs here instead of the recorded directory");
  }

  void Run(const GlobalOptions& global) override {
    Json m;
    try {
      m = Json::parse(ReadText(manifest_));
    } catch (const Json::exception& e) {
      throw FormatError(manifest_ + ": " + e.what());
    }
    if (!m.contains("command") || !m.contains("config") || !m.contains("kernels")) {
      throw FormatError(manifest_ + ": not a " + std::string(kToolName) + " manifest");
    }
    std::vector<std::string> args = {kToolName, "--kernels", m["kernels"].get<std::string>(),
                                     "--threads", std::to_string(global.threads),
                                     m["command"].get<std::string>()};
    for (const auto& [key, value] : m["config"].items()) {
      if (key == "out" && !out_.empty()) {
        args.insert(args.end(), {"--out", out_});
      } else if (value.is_boolean()) {
        if (value.get<bool>()) args.push_back("--" + key);
      } else if (value.is_string()) {
        if (value.get<std::string>().empty()) continue;
        args.insert(args.end(), {"--" + key, value.get<std::string>()});
      } else if (value.is_array()) {
        std::string joined;
        for (const auto& e : value) joined += (joined.empty() ? "" : ",") + e.dump();
        args.insert(args.end(), {"--" + key, joined});
      } else {
        args.insert(args.end(), {"--" + key, value.dump()});
      }
    }
    if (RunCli(args) != 0) throw Error("replayed command failed");
  }

 private:
  std::string manifest_;
  std::string out_;
};

std::string ErrorKind(const Error& e) {
  if (dynamic_cast<const DimensionError*>(&e)) return "dimension_error";
  if (dynamic_cast<const InvalidArgument*>(&e)) return "invalid_argument";
  if (dynamic_cast<const FormatError*>(&e)) return "format_error";
  if (dynamic_cast<const IoError*>(&e)) return "io_error";
  if (dynamic_cast<const NumericalError*>(&e)) return "numerical_error";
  if (dynamic_cast<const MissingInputsError*>(&e)) return "missing_inputs";
  return "error";
}

void ReportError(const std::string& kind, const std::string& message,
                 const std::vector<std::string>& missing = {}) {
  Json j{{"error", kind}, {"message", message}};
  if (!missing.empty()) j["missing"] = missing;
  std::cerr << j.dump() << "\n";
}

}  // namespace

int RunCli(const std::vector<std::string>& args) {
  CLI::App app{"Saliency masks and completeness/soundness evaluation.", kToolName};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.fallthrough();
  GlobalOptions global;
  app.add_option("--kernels", global.kernels, "numeric kernels: auto | scalar | avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}))
      ->capture_default_str();
  app.add_option("--threads", global.threads,
                 "worker threads, 0 for all cores; never changes any output")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  std::vector<std::unique_ptr<Command>> commands;
  commands.push_back(std::make_unique<GenDataCommand>(app));
  commands.push_back(std::make_unique<TrainCommand>(app));
  commands.push_back(std::make_unique<MaskCommand>(app));
  commands.push_back(std::make_unique<EvalCommand>(app));
  commands.push_back(std::make_unique<LinTheoryCommand>(app));
  commands.push_back(std::make_unique<SanityCommand>(app));
  commands.push_back(std::make_unique<ReplayCommand>(app));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    kernels::SetBackend(*kernels::ParseBackend(global.kernels));
    for (const auto& command : commands) {
      if (command->app()->parsed()) command->Run(global);
    }
  } catch (const MissingInputsError& e) {
    ReportError(ErrorKind(e), e.what(), e.missing());
    return 2;
  } catch (const Error& e) {
    ReportError(ErrorKind(e), e.what());
    return 1;
  } catch (const std::exception& e) {
    ReportError("internal", e.what());
    return 1;
  }
  return 0;
}

}  // namespace soundsal::cli
