// Copyright 2026 The urbanrest Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Model assembly, training loop, evaluation and experiment harnesses.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "urbanrest/error.hpp"
#include "urbanrest/gnn.hpp"
#include "urbanrest/io_util.hpp"

namespace urbanrest {
namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void AdamStep(const std::vector<Parameter*>& params, const ModelConfig& cfg, std::size_t step) {
  const double c1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
  for (Parameter* p : params) {
    auto& w = p->value.data();
    const auto& g = p->grad.data();
    auto& m = p->adam_m.data();
    auto& v = p->adam_v.data();
    const double wd = p->decay ? cfg.weight_decay : 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double grad = g[i] + wd * w[i];
      m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * grad;
      v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * grad * grad;
      w[i] -= cfg.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + kAdamEps);
    }
  }
}

double MaskAccuracy(std::span<const int> pred, std::span<const int> truth,
                    std::span<const std::size_t> mask) {
  if (mask.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i : mask) ok += pred[i] == truth[i];
  return static_cast<double>(ok) / static_cast<double>(mask.size());
}

nlohmann::json ConfigToJson(const ModelConfig& c) {
  return {{"arch", ArchName(c.arch)},
          {"hidden", c.hidden},
          {"heads", c.heads},
          {"epochs", c.epochs},
          {"learning_rate", c.learning_rate},
          {"weight_decay", c.weight_decay},
          {"seed", c.seed},
          {"split", {c.train_fraction, c.val_fraction, c.test_fraction}},
          {"allow_degenerate_labels", c.allow_degenerate_labels}};
}

ModelConfig ConfigFromJson(const nlohmann::json& j) {
  ModelConfig c;
  c.arch = ParseArch(j.at("arch").get<std::string>());
  c.hidden = j.at("hidden").get<std::vector<std::size_t>>();
  c.heads = j.at("heads").get<std::size_t>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.weight_decay = j.at("weight_decay").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  const auto split = j.at("split").get<std::vector<double>>();
  if (split.size() != 3) ThrowData("model checkpoint: bad split");
  c.train_fraction = split[0];
  c.val_fraction = split[1];
  c.test_fraction = split[2];
  c.allow_degenerate_labels = j.value("allow_degenerate_labels", false);
  return c;
}

void MeanStd(const std::vector<double>& xs, double& mean, double& stddev) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  stddev = xs.size() > 1 ? std::sqrt(ss / static_cast<double>(xs.size() - 1)) : 0.0;
}

}  // namespace

const char* ArchName(Arch a) {
  switch (a) {
    case Arch::kGcn: return "gcn";
    case Arch::kGat: return "gat";
    case Arch::kSage: return "sage";
    case Arch::kMlp: return "mlp";
  }
  return "?";
}

Arch ParseArch(std::string_view name) {
  if (name == "gcn") return Arch::kGcn;
  if (name == "gat") return Arch::kGat;
  if (name == "sage" || name == "graphsage") return Arch::kSage;
  if (name == "mlp") return Arch::kMlp;
  ThrowUsage("unknown architecture '" + std::string(name) + "' (expected gcn|gat|sage|mlp)");
}

void ModelConfig::Validate() const {
  if (hidden.empty()) ThrowUsage("model.hidden must list at least one width");
  for (std::size_t h : hidden) {
    if (h == 0) ThrowUsage("model.hidden widths must be positive");
  }
  if (epochs < 1) ThrowUsage("model.epochs must be >= 1");
  if (heads < 1) ThrowUsage("model.heads must be >= 1");
  if (!(learning_rate > 0.0)) ThrowUsage("model.learning_rate must be positive");
  if (weight_decay < 0.0) ThrowUsage("model.weight_decay must be non-negative");
  if (train_fraction < 0.0 || val_fraction < 0.0 || test_fraction < 0.0 ||
      std::abs(train_fraction + val_fraction + test_fraction - 1.0) > 1e-9) {
    ThrowUsage("model split fractions must be non-negative and sum to 1");
  }
}

GnnModel GnnModel::Build(const ModelConfig& config, std::size_t in_dim) {
  config.Validate();
  if (in_dim == 0) ThrowData("model input has zero feature columns");
  GnnModel model;
  model.config_ = config;
  model.in_dim_ = in_dim;
  Rng rng(MixSeed(config.seed, 1));
  std::size_t prev = in_dim;
  for (std::size_t l = 0; l <= config.hidden.size(); ++l) {
    const bool last = l == config.hidden.size();
    const std::size_t out = last ? kNumClasses : config.hidden[l];
    const Activation act = last ? Activation::kIdentity : Activation::kRelu;
    switch (config.arch) {
      case Arch::kGcn: model.layers_.push_back(MakeGcnLayer(prev, out, act, rng)); break;
      case Arch::kSage: model.layers_.push_back(MakeSageLayer(prev, out, act, rng)); break;
      case Arch::kMlp: model.layers_.push_back(MakeMlpLayer(prev, out, act, rng)); break;
      case Arch::kGat:
        model.layers_.push_back(last ? MakeGatLayer(prev, out, 1, HeadCombine::kMean, act, rng)
                                     : MakeGatLayer(prev, out, config.heads, HeadCombine::kConcat,
                                                    act, rng));
        break;
    }
    prev = out;
  }
  return model;
}

DenseMatrix GnnModel::Logits(const DenseMatrix& x, const PreparedGraph& graph) {
  if (x.cols() != in_dim_) {
    ThrowData("model expects " + std::to_string(in_dim_) + " feature columns, got " +
              std::to_string(x.cols()));
  }
  if (x.rows() != graph.n()) ThrowData("feature rows do not match graph size");
  DenseMatrix h = x;
  for (auto& layer : layers_) h = layer->Forward(h, graph);
  return h;
}

DenseMatrix GnnModel::Probabilities(const DenseMatrix& x, const PreparedGraph& graph) {
  return SoftmaxRows(Logits(x, graph));
}

std::vector<int> GnnModel::Predict(const DenseMatrix& x, const PreparedGraph& graph) {
  const DenseMatrix logits = Logits(x, graph);
  std::vector<int> pred(logits.rows());
  for (std::size_t i = 0; i < logits.rows(); ++i) {
    const auto row = logits.Row(i);
    pred[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return pred;
}

DenseMatrix GnnModel::Backward(const DenseMatrix& grad_logits, const PreparedGraph& graph) {
  DenseMatrix g = grad_logits;
  for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->Backward(g, graph);
  return g;
}

void GnnModel::ZeroGrad() {
  for (Parameter* p : Parameters()) p->grad.Fill(0.0);
}

std::vector<Parameter*> GnnModel::Parameters() {
  std::vector<Parameter*> out;
  for (auto& layer : layers_) {
    for (Parameter* p : layer->Parameters()) out.push_back(p);
  }
  return out;
}

void GnnModel::Save(const std::filesystem::path& path) const {
  nlohmann::json header;
  header["format"] = "urbanrest.model";
  header["config"] = ConfigToJson(config_);
  header["in_dim"] = in_dim_;
  auto shapes = nlohmann::json::array();
  std::vector<double> payload;
  for (const auto& layer : layers_) {
    for (Parameter* p : layer->Parameters()) {
      shapes.push_back({{"layer", layer->kind()}, {"name", p->name},
                        {"rows", p->value.rows()}, {"cols", p->value.cols()}});
      payload.insert(payload.end(), p->value.data().begin(), p->value.data().end());
    }
  }
  header["params"] = shapes;
  io::WriteBinaryDoubles(path, header, payload);
}

GnnModel GnnModel::Load(const std::filesystem::path& path) {
  const auto bin = io::ReadBinaryDoubles(path, "urbanrest.model");
  GnnModel model = Build(ConfigFromJson(bin.header.at("config")),
                         bin.header.at("in_dim").get<std::size_t>());
  const auto params = model.Parameters();
  const auto& shapes = bin.header.at("params");
  if (shapes.size() != params.size()) ThrowData(path.string() + ": parameter count mismatch");
  std::size_t off = 0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter* p = params[k];
    if (shapes[k].at("rows").get<std::size_t>() != p->value.rows() ||
        shapes[k].at("cols").get<std::size_t>() != p->value.cols()) {
      ThrowData(path.string() + ": shape mismatch for " + p->name);
    }
    if (off + p->value.size() > bin.values.size()) ThrowData(path.string() + ": truncated payload");
    std::copy_n(bin.values.begin() + static_cast<std::ptrdiff_t>(off), p->value.size(),
                p->value.data().begin());
    off += p->value.size();
  }
  if (off != bin.values.size()) ThrowData(path.string() + ": trailing payload");
  return model;
}

DataSplit StratifiedSplit(std::span<const int> labels, const ModelConfig& config) {
  Rng rng(MixSeed(config.seed, 2));
  DataSplit split;
  for (int c = 0; c < kNumClasses; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) idx.push_back(i);
    }
    rng.Shuffle(idx.begin(), idx.end());
    const auto count = static_cast<double>(idx.size());
    const std::size_t n_train =
        std::min(idx.size(), static_cast<std::size_t>(std::llround(config.train_fraction * count)));
    const std::size_t n_val = std::min(
        idx.size() - n_train, static_cast<std::size_t>(std::llround(config.val_fraction * count)));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k < n_train) {
        split.train.push_back(idx[k]);
      } else if (k < n_train + n_val) {
        split.val.push_back(idx[k]);
      } else {
        split.test.push_back(idx[k]);
      }
    }
  }
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.val.begin(), split.val.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Metrics Evaluate(std::span<const int> predicted, std::span<const int> truth,
                 std::span<const std::size_t> mask) {
  if (mask.empty()) ThrowData("evaluate: empty mask");
  if (predicted.size() != truth.size()) ThrowData("evaluate: prediction/label length mismatch");
  Metrics m;
  std::size_t correct = 0;
  for (std::size_t i : mask) {
    const int t = truth[i];
    const int p = predicted[i];
    if (t < 0 || t >= kNumClasses || p < 0 || p >= kNumClasses) {
      ThrowData("evaluate: node " + std::to_string(i) + " lacks a valid class");
    }
    ++m.confusion[t][p];
    correct += t == p;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(mask.size());
  double f1_sum = 0.0;
  for (int c = 0; c < kNumClasses; ++c) {
    const double tp = static_cast<double>(m.confusion[c][c]);
    double fp = 0.0, fn = 0.0;
    for (int o = 0; o < kNumClasses; ++o) {
      if (o == c) continue;
      fp += static_cast<double>(m.confusion[o][c]);
      fn += static_cast<double>(m.confusion[c][o]);
    }
    const double precision = tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
    const double recall = tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    f1_sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  m.macro_f1 = f1_sum / kNumClasses;
  return m;
}

TrainResult Train(const DenseMatrix& features, const Adjacency& adjacency,
                  std::span<const int> labels, const ModelConfig& config) {
  config.Validate();
  const auto start = std::chrono::steady_clock::now();
  if (features.rows() != labels.size() || adjacency.n() != labels.size()) {
    ThrowData("train: features, adjacency and labels disagree on node count");
  }
  if (!features.AllFinite()) ThrowNumeric("train: non-finite feature values");
  if (!config.allow_degenerate_labels) {
    std::size_t per_class[kNumClasses] = {};
    for (int l : labels) {
      if (l >= 0 && l < kNumClasses) ++per_class[l];
    }
    for (int c = 0; c < kNumClasses; ++c) {
      if (per_class[c] < 3) {
        ThrowData(std::string("train: class '") + ClassLabelName(c) + "' has " +
                  std::to_string(per_class[c]) + " labeled nodes (need >= 3)");
      }
    }
  }

  TrainResult result;
  result.split = StratifiedSplit(labels, config);
  if (result.split.train.empty()) ThrowData("degenerate split: no training nodes");
  if (!config.allow_degenerate_labels) {
    bool present[kNumClasses] = {};
    for (std::size_t i : result.split.train) present[labels[i]] = true;
    for (int c = 0; c < kNumClasses; ++c) {
      if (!present[c]) ThrowData("degenerate split: class absent from the training split");
    }
  }

  const PreparedGraph graph(config.arch == Arch::kMlp ? Adjacency(adjacency.n()) : adjacency);
  result.model = GnnModel::Build(config, features.cols());
  auto params = result.model.Parameters();
  result.report.seed = config.seed;
  result.report.loss_curve.reserve(config.epochs);
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    result.model.ZeroGrad();
    const DenseMatrix probs = SoftmaxRows(result.model.Logits(features, graph));
    const double loss = CrossEntropyLoss(probs, labels, result.split.train);
    if (!std::isfinite(loss)) ThrowNumeric("train: loss became non-finite at epoch " + std::to_string(epoch));
    result.report.loss_curve.push_back(loss);
    result.model.Backward(CrossEntropyLogitGrad(probs, labels, result.split.train), graph);
    AdamStep(params, config, epoch);
  }

  const auto pred = result.model.Predict(features, graph);
  result.report.train_accuracy = MaskAccuracy(pred, labels, result.split.train);
  result.report.val_accuracy = MaskAccuracy(pred, labels, result.split.val);
  if (!result.split.test.empty()) result.report.test = Evaluate(pred, labels, result.split.test);
  result.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

TrainResult Train(const CityGraph& graph, const ModelConfig& config) {
  graph.Validate();
  return Train(graph.features, graph.weights.adjacency, graph.labels, config);
}

CityGraph KeepGroups(const CityGraph& graph, std::span<const std::string> groups_to_keep) {
  if (groups_to_keep.empty()) ThrowUsage("ablation needs at least one feature group to keep");
  for (const auto& name : groups_to_keep) {
    const bool known = std::any_of(graph.group_spans.begin(), graph.group_spans.end(),
                                   [&](const GroupSpan& g) { return g.name == name; });
    if (!known) ThrowUsage("unknown feature group '" + name + "'");
  }
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
  std::vector<GroupSpan> spans;
  std::size_t begin = 0;
  for (const auto& g : graph.group_spans) {
    if (std::find(groups_to_keep.begin(), groups_to_keep.end(), g.name) == groups_to_keep.end()) {
      continue;
    }
    ranges.emplace_back(g.begin, g.end);
    spans.push_back({g.name, begin, begin + g.width()});
    begin += g.width();
  }
  CityGraph out = graph;
  out.features = SelectColumns(graph.features, ranges);
  out.group_spans = std::move(spans);
  return out;
}

TrainReport Ablate(const CityGraph& graph, std::span<const std::string> groups_to_keep,
                   const ModelConfig& config) {
  return Train(KeepGroups(graph, groups_to_keep), config).report;
}

RunSummary RepeatTraining(const CityGraph& graph, const ModelConfig& config, std::size_t runs,
                          std::string name) {
  if (runs < 1) ThrowUsage("runs must be >= 1");
  std::vector<double> acc, f1, secs;
  for (std::size_t r = 0; r < runs; ++r) {
    ModelConfig c = config;
    c.seed = config.seed + r;
    const auto report = Train(graph, c).report;
    acc.push_back(report.test.accuracy);
    f1.push_back(report.test.macro_f1);
    secs.push_back(report.wall_seconds);
  }
  RunSummary s;
  s.name = std::move(name);
  s.weights = WeightSchemeName(graph.weights.scheme);
  s.runs = runs;
  double unused = 0.0;
  MeanStd(acc, s.accuracy_mean, s.accuracy_std);
  MeanStd(f1, s.f1_mean, s.f1_std);
  MeanStd(secs, s.seconds_mean, unused);
  return s;
}

std::vector<AblationExperiment> StandardAblationBattery() {
  return {
      {"all-features", {"perception", "spatial", "socioeconomic"}},
      {"drop-spatial", {"perception", "socioeconomic"}},
      {"drop-perception", {"spatial", "socioeconomic"}},
      {"drop-socioeconomic", {"perception", "spatial"}},
      {"spatial-only", {"spatial"}},
  };
}

std::vector<std::pair<std::string, ModelConfig>> StandardModelVariants(const ModelConfig& base) {
  std::vector<std::pair<std::string, ModelConfig>> out;
  ModelConfig c = base;
  c.arch = Arch::kGcn;
  c.hidden = {64, 32};
  out.emplace_back("GCN1", c);
  c.hidden = {32, 16};
  out.emplace_back("GCN2", c);
  c = base;
  c.arch = Arch::kSage;
  out.emplace_back("GraphSAGE", c);
  c.arch = Arch::kGat;
  out.emplace_back("GAT", c);
  c.arch = Arch::kMlp;
  out.emplace_back("MLP", c);
  return out;
}

std::string FormatRunTable(std::span<const RunSummary> rows, bool with_time) {
  std::ostringstream out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-8s %-16s %-16s", "model", "weights", "accuracy", "f1");
  out << buf << (with_time ? " time_s" : "") << '\n';
  for (const auto& r : rows) {
    char acc[32], f1[32];
    std::snprintf(acc, sizeof(acc), "%.3f+-%.3f", r.accuracy_mean, r.accuracy_std);
    std::snprintf(f1, sizeof(f1), "%.3f+-%.3f", r.f1_mean, r.f1_std);
    std::snprintf(buf, sizeof(buf), "%-20s %-8s %-16s %-16s", r.name.c_str(), r.weights.c_str(),
                  acc, f1);
    out << buf;
    if (with_time) {
      std::snprintf(buf, sizeof(buf), " %.3f", r.seconds_mean);
      out << buf;
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace urbanrest
