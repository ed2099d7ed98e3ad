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

#include "urbanrest/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {
namespace {

double NormPdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }
double NormCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

// Acklam's rational approximation polished by two Newton steps.
double NormInv(double p) {
  if (!(p > 0.0 && p < 1.0)) ThrowUsage("inverse normal CDF needs p in (0, 1)");
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double lo = 0.02425;
  double x;
  if (p < lo) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - lo) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  for (int it = 0; it < 2; ++it) x -= (NormCdf(x) - p) / NormPdf(x);
  return x;
}

// Truncated-Gaussian corrections for a win (difference > margin).
double VWin(double t, double e) {
  const double x = t - e;
  const double denom = NormCdf(x);
  if (denom < 1e-300) return -x;
  return NormPdf(x) / denom;
}
double WWin(double t, double e) {
  const double v = VWin(t, e);
  return v * (v + t - e);
}

// Phi(e - t) - Phi(-e - t), written with the arguments on the negative side
// so the difference does not cancel in the tails.
double DrawMass(double t, double e) {
  return t < 0.0 ? NormCdf(e + t) - NormCdf(t - e) : NormCdf(e - t) - NormCdf(-e - t);
}

// Corrections for a draw (|difference| <= margin).
double VDraw(double t, double e) {
  const double denom = DrawMass(t, e);
  if (denom < 1e-300) return t < 0.0 ? -t - e : -t + e;
  return (NormPdf(-e - t) - NormPdf(e - t)) / denom;
}
double WDraw(double t, double e) {
  const double denom = DrawMass(t, e);
  if (denom < 1e-300) return 1.0;
  const double v = VDraw(t, e);
  return v * v + ((e - t) * NormPdf(e - t) + (e + t) * NormPdf(e + t)) / denom;
}

struct Prepared {
  double var_a, var_b, c, t, e;
};

Prepared Prepare(const Rating& a, const Rating& b, const TrueSkillParams& p) {
  Prepared q;
  q.var_a = a.sigma * a.sigma + p.tau * p.tau;
  q.var_b = b.sigma * b.sigma + p.tau * p.tau;
  q.c = std::sqrt(2.0 * p.beta * p.beta + q.var_a + q.var_b);
  q.t = (a.mu - b.mu) / q.c;
  q.e = p.DrawMargin() / q.c;
  return q;
}

Rating Posterior(double mu, double var, double c, double v, double w, double sign) {
  Rating r;
  r.mu = mu + sign * var / c * v;
  r.sigma = std::sqrt(var * std::max(1.0 - var / (c * c) * w, std::numeric_limits<double>::min()));
  return r;
}

}  // namespace

const char* IndicatorName(Indicator i) {
  switch (i) {
    case Indicator::kBeingAway: return "being_away";
    case Indicator::kExtent: return "extent";
    case Indicator::kFascination: return "fascination";
    case Indicator::kCompatibility: return "compatibility";
  }
  return "?";
}

Indicator ParseIndicator(std::string_view name) {
  for (Indicator i : kAllIndicators) {
    if (name == IndicatorName(i)) return i;
  }
  ThrowUsage("unknown indicator '" + std::string(name) +
             "' (expected being_away|extent|fascination|compatibility)");
}

const char* OutcomeName(VoteOutcome o) {
  switch (o) {
    case VoteOutcome::kLeft: return "left";
    case VoteOutcome::kRight: return "right";
    case VoteOutcome::kBoth: return "both";
    case VoteOutcome::kNeither: return "neither";
  }
  return "?";
}

VoteOutcome ParseOutcome(std::string_view name) {
  if (name == "left") return VoteOutcome::kLeft;
  if (name == "right") return VoteOutcome::kRight;
  if (name == "both") return VoteOutcome::kBoth;
  if (name == "neither") return VoteOutcome::kNeither;
  ThrowUsage("unknown outcome '" + std::string(name) + "' (expected left|right|both|neither)");
}

double TrueSkillParams::DrawMargin() const {
  if (draw_probability <= 0.0) return 0.0;
  return NormInv((draw_probability + 1.0) / 2.0) * std::numbers::sqrt2 * beta;
}

void TrueSkillParams::Validate() const {
  if (!(sigma0 > 0.0) || !(beta > 0.0) || tau < 0.0) {
    ThrowUsage("TrueSkill sigma0 and beta must be positive, tau non-negative");
  }
  if (draw_probability < 0.0 || draw_probability >= 1.0) {
    ThrowUsage("TrueSkill draw probability must be in [0, 1)");
  }
}

std::pair<Rating, Rating> TrueSkillWin(const Rating& winner, const Rating& loser,
                                       const TrueSkillParams& params) {
  const Prepared q = Prepare(winner, loser, params);
  const double v = VWin(q.t, q.e);
  const double w = WWin(q.t, q.e);
  return {Posterior(winner.mu, q.var_a, q.c, v, w, +1.0),
          Posterior(loser.mu, q.var_b, q.c, v, w, -1.0)};
}

std::pair<Rating, Rating> TrueSkillDraw(const Rating& a, const Rating& b,
                                        const TrueSkillParams& params) {
  const Prepared q = Prepare(a, b, params);
  const double v = VDraw(q.t, q.e);
  const double w = WDraw(q.t, q.e);
  return {Posterior(a.mu, q.var_a, q.c, v, w, +1.0), Posterior(b.mu, q.var_b, q.c, v, w, -1.0)};
}

RatingState::RatingState(TrueSkillParams params) : params_(params) { params_.Validate(); }

void RatingState::RegisterImage(const std::string& image_id) {
  if (image_id.empty()) ThrowData("empty image id");
  if (images_.contains(image_id)) return;
  ImageState s;
  s.ratings.fill(Rating{params_.mu0, params_.sigma0});
  images_.emplace(image_id, s);
}

std::vector<std::string> RatingState::ImageIds() const {
  std::vector<std::string> ids;
  for (const auto& [id, _] : images_) ids.push_back(id);
  return ids;
}

const RatingState::ImageState& RatingState::Image(const std::string& id) const {
  const auto it = images_.find(id);
  if (it == images_.end()) ThrowData("unknown image '" + id + "'");
  return it->second;
}

const Rating& RatingState::GetRating(const std::string& image_id, Indicator indicator) const {
  return Image(image_id).ratings[static_cast<std::size_t>(indicator)];
}

std::size_t RatingState::ComparisonCount(const std::string& image_id) const {
  return Image(image_id).comparisons;
}

std::size_t RatingState::IndicatorCount(const std::string& image_id, Indicator indicator) const {
  return Image(image_id).indicator_counts[static_cast<std::size_t>(indicator)];
}

std::size_t RatingState::MinComparisonCount() const {
  std::size_t m = images_.empty() ? 0 : std::numeric_limits<std::size_t>::max();
  for (const auto& [_, s] : images_) m = std::min(m, s.comparisons);
  return m;
}

const VoteRecord& RatingState::Apply(VoteRecord record) {
  if (record.left == record.right) ThrowData("an image cannot be compared with itself");
  auto lit = images_.find(record.left);
  auto rit = images_.find(record.right);
  if (lit == images_.end()) ThrowData("unknown image '" + record.left + "'");
  if (rit == images_.end()) ThrowData("unknown image '" + record.right + "'");
  const auto k = static_cast<std::size_t>(record.indicator);
  Rating& left = lit->second.ratings[k];
  Rating& right = rit->second.ratings[k];
  switch (record.outcome) {
    case VoteOutcome::kLeft: std::tie(left, right) = TrueSkillWin(left, right, params_); break;
    case VoteOutcome::kRight: std::tie(right, left) = TrueSkillWin(right, left, params_); break;
    case VoteOutcome::kBoth: std::tie(left, right) = TrueSkillDraw(left, right, params_); break;
    case VoteOutcome::kNeither: break;
  }
  for (auto* s : {&lit->second, &rit->second}) {
    ++s->comparisons;
    ++s->indicator_counts[k];
  }
  record.seq = ledger_.size() + 1;
  ledger_.push_back(std::move(record));
  return ledger_.back();
}

bool operator==(const RatingState& a, const RatingState& b) {
  if (a.images_.size() != b.images_.size()) return false;
  for (auto ia = a.images_.begin(), ib = b.images_.begin(); ia != a.images_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.ratings != ib->second.ratings ||
        ia->second.indicator_counts != ib->second.indicator_counts ||
        ia->second.comparisons != ib->second.comparisons) {
      return false;
    }
  }
  return a.ledger_.size() == b.ledger_.size();
}

std::pair<std::string, std::string> NextPair(const RatingState& state, Indicator indicator,
                                             std::uint64_t seed) {
  if (state.image_count() < 2) ThrowData("need at least 2 registered images to form a pair");
  const auto ids = state.ImageIds();
  std::vector<std::pair<std::size_t, std::size_t>> order;  // (count, index)
  for (std::size_t i = 0; i < ids.size(); ++i) order.emplace_back(state.ComparisonCount(ids[i]), i);
  std::sort(order.begin(), order.end());
  const std::size_t c1 = order[0].first;
  const std::size_t c2 = order[1].first;
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  if (c1 == c2) {
    std::vector<std::size_t> group;
    for (const auto& [c, i] : order) {
      if (c == c1) group.push_back(i);
    }
    for (std::size_t a = 0; a < group.size(); ++a) {
      for (std::size_t b = a + 1; b < group.size(); ++b) candidates.emplace_back(group[a], group[b]);
    }
  } else {
    for (const auto& [c, i] : order) {
      if (c == c2) candidates.emplace_back(order[0].second, i);
    }
  }
  Rng rng(MixSeed(MixSeed(seed, state.ledger().size()), static_cast<std::uint64_t>(indicator)));
  auto [a, b] = candidates[rng.Below(candidates.size())];
  if (rng.Below(2) == 1) std::swap(a, b);
  return {ids[a], ids[b]};
}

RatingState ApplyVote(RatingState state, const std::pair<std::string, std::string>& pair,
                      Indicator indicator, VoteOutcome outcome) {
  VoteRecord r;
  r.pair_id = pair.first + "|" + pair.second;
  r.indicator = indicator;
  r.left = pair.first;
  r.right = pair.second;
  r.outcome = outcome;
  state.Apply(std::move(r));
  return state;
}

CompositeScores ComputeCompositeScores(const RatingState& state) {
  CompositeScores out;
  for (const auto& id : state.ImageIds()) {
    bool complete = true;
    double total = 0.0;
    for (Indicator ind : kAllIndicators) {
      if (state.IndicatorCount(id, ind) == 0) complete = false;
      total += state.GetRating(id, ind).mu;
    }
    if (complete) {
      out.scores[id] = total / static_cast<double>(kNumIndicators);
    } else {
      out.incomplete.push_back(id);
    }
  }
  return out;
}

JenksResult JenksBreaks(std::span<const double> values, std::size_t k) {
  if (k < 2) ThrowUsage("jenks_breaks needs k >= 2");
  if (values.size() < k) ThrowData("degenerate breaks: fewer values than classes");
  for (double v : values) {
    if (!std::isfinite(v)) ThrowNumeric("jenks_breaks: non-finite value");
  }
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  std::size_t n_distinct = 1;
  for (std::size_t i = 1; i < v.size(); ++i) n_distinct += v[i] != v[i - 1];
  if (n_distinct < k) ThrowData("degenerate breaks: fewer distinct values than classes");

  const std::size_t n = v.size();
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + v[i];
    s2[i + 1] = s2[i] + v[i] * v[i];
  }
  // SSD of v[i..j) (half-open).
  auto cost = [&](std::size_t i, std::size_t j) {
    const double len = static_cast<double>(j - i);
    const double sum = s1[j] - s1[i];
    return std::max(0.0, (s2[j] - s2[i]) - sum * sum / len);
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // best[c][j]: min SSD of v[0..j) in c+1 classes; start[c][j]: first index of the last class.
  std::vector<std::vector<double>> best(k, std::vector<double>(n + 1, kInf));
  std::vector<std::vector<std::size_t>> start(k, std::vector<std::size_t>(n + 1, 0));
  for (std::size_t j = 1; j <= n; ++j) best[0][j] = cost(0, j);
  for (std::size_t c = 1; c < k; ++c) {
    for (std::size_t j = c + 1; j <= n; ++j) {
      for (std::size_t i = c; i < j; ++i) {
        if (v[i - 1] == v[i]) continue;  // never split equal values
        const double total = best[c - 1][i] + cost(i, j);
        if (total < best[c][j]) {
          best[c][j] = total;
          start[c][j] = i;
        }
      }
    }
  }
  if (!std::isfinite(best[k - 1][n])) ThrowData("degenerate breaks");
  std::vector<std::size_t> bounds(k + 1);
  bounds[k] = n;
  for (std::size_t c = k - 1; c >= 1; --c) bounds[c] = start[c][bounds[c + 1]];
  bounds[0] = 0;

  JenksResult result;
  for (std::size_t c = 1; c < k; ++c) result.breaks.push_back(v[bounds[c] - 1]);
  for (std::size_t c = 0; c < k; ++c) {
    double mean = 0.0;
    for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) mean += v[i];
    mean /= static_cast<double>(bounds[c + 1] - bounds[c]);
    for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) result.ssd += (v[i] - mean) * (v[i] - mean);
  }
  for (double x : values) {
    int cls = 0;
    while (cls < static_cast<int>(result.breaks.size()) && x > result.breaks[cls]) ++cls;
    result.classes.push_back(cls);
  }
  return result;
}

LabelSet LabelRoads(std::span<const ScoredSample> samples, std::span<const RoadSegment> roads,
                    double half_width) {
  if (samples.empty()) ThrowData("label_roads: no scored samples");
  std::vector<std::string> ids;
  std::vector<double> road_scores;
  for (const auto& road : roads) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& s : samples) {
      if (PointPolylineDistance(s.location, road.polyline) <= half_width) {
        sum += s.score;
        ++count;
      }
    }
    if (count == 0) continue;
    ids.push_back(road.road_id);
    road_scores.push_back(sum / static_cast<double>(count));
  }
  if (ids.empty()) ThrowData("label_roads: no road buffer contains any scored sample");
  const JenksResult jenks = JenksBreaks(road_scores, kNumClasses);
  LabelSet out;
  out.breaks = jenks.breaks;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out.classes[ids[i]] = jenks.classes[i];
    out.scores[ids[i]] = road_scores[i];
  }
  return out;
}

std::vector<ImageEntry> ReadImageManifest(const std::filesystem::path& path) {
  std::vector<ImageEntry> out;
  std::set<std::string> seen;
  for (const auto& line : io::ReadDataLines(path, "image-manifest")) {
    const auto parts = io::Split(line, ',');
    if (parts.size() != 4) ThrowData(path.string() + ": expected 'image_id,path,x,y'");
    if (io::Trim(parts[0]) == "image_id") continue;
    ImageEntry e;
    e.image_id = std::string(io::Trim(parts[0]));
    if (!seen.insert(e.image_id).second) ThrowData(path.string() + ": duplicate image " + e.image_id);
    e.path = std::string(io::Trim(parts[1]));
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    e.location = {io::ParseDouble(parts[2], "x"), io::ParseDouble(parts[3], "y")};
    out.push_back(std::move(e));
  }
  return out;
}

void WriteImageManifest(const std::filesystem::path& path, std::span<const ImageEntry> images,
                        const std::filesystem::path& relative_to) {
  std::ostringstream out;
  out << io::FormatHeader("image-manifest") << '\n';
  for (const auto& e : images) {
    out << e.image_id << ',' << std::filesystem::relative(e.path, relative_to).generic_string()
        << ',' << io::FormatDouble(e.location.x) << ',' << io::FormatDouble(e.location.y) << '\n';
  }
  io::WriteFile(path, out.str());
}

std::string LedgerLine(const VoteRecord& r) {
  int points_left = 0, points_right = 0;
  if (r.outcome == VoteOutcome::kLeft || r.outcome == VoteOutcome::kBoth) points_left = 1;
  if (r.outcome == VoteOutcome::kRight || r.outcome == VoteOutcome::kBoth) points_right = 1;
  nlohmann::json j = {{"v", io::kFormatVersion},
                      {"seq", r.seq},
                      {"pair_id", r.pair_id},
                      {"indicator", IndicatorName(r.indicator)},
                      {"left", r.left},
                      {"right", r.right},
                      {"outcome", OutcomeName(r.outcome)},
                      {"points", {points_left, points_right}},
                      {"ts", r.timestamp_ms}};
  return j.dump();
}

VoteRecord ParseLedgerLine(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    if (j.value("v", -1) != io::kFormatVersion) ThrowData("ledger record has an unsupported version");
    VoteRecord r;
    r.seq = j.at("seq").get<std::uint64_t>();
    r.pair_id = j.at("pair_id").get<std::string>();
    r.indicator = ParseIndicator(j.at("indicator").get<std::string>());
    r.left = j.at("left").get<std::string>();
    r.right = j.at("right").get<std::string>();
    r.outcome = ParseOutcome(j.at("outcome").get<std::string>());
    r.timestamp_ms = j.value("ts", std::int64_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    ThrowData(std::string("malformed ledger record: ") + e.what());
  }
}

std::vector<VoteRecord> ReadLedger(const std::filesystem::path& path) {
  std::vector<VoteRecord> out;
  if (!std::filesystem::exists(path)) return out;
  for (const auto& line : io::ReadDataLines(path, "ledger")) out.push_back(ParseLedgerLine(line));
  return out;
}

RatingState ReplayLedger(std::span<const std::string> image_ids, std::span<const VoteRecord> ledger,
                         const TrueSkillParams& params) {
  RatingState state(params);
  for (const auto& id : image_ids) state.RegisterImage(id);
  for (const auto& r : ledger) state.Apply(r);
  return state;
}

void WriteLabelSet(const std::filesystem::path& path, const LabelSet& labels) {
  std::ostringstream out;
  out << io::FormatHeader("label-set") << '\n';
  out << "# breaks";
  for (double b : labels.breaks) out << ' ' << io::FormatDouble(b);
  out << '\n';
  for (const auto& [road, cls] : labels.classes) {
    out << road << ',' << ClassLabelName(cls) << ',' << io::FormatDouble(labels.scores.at(road)) << '\n';
  }
  io::WriteFile(path, out.str());
}

}  // namespace urbanrest
