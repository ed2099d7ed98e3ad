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

#ifndef URBANREST_LABELING_HPP_
#define URBANREST_LABELING_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "urbanrest/city_graph.hpp"
#include "urbanrest/geometry.hpp"

namespace urbanrest {

// Restorativeness indicators rated as independent channels.
enum class Indicator { kBeingAway = 0, kExtent = 1, kFascination = 2, kCompatibility = 3 };
inline constexpr std::size_t kNumIndicators = 4;
inline constexpr Indicator kAllIndicators[kNumIndicators] = {
    Indicator::kBeingAway, Indicator::kExtent, Indicator::kFascination, Indicator::kCompatibility};
const char* IndicatorName(Indicator i);
Indicator ParseIndicator(std::string_view name);

// Minimum comparisons per image before it stops being preferred by the scheduler.
inline constexpr std::size_t kTargetComparisons = 20;

enum class VoteOutcome { kLeft, kRight, kBoth, kNeither };
const char* OutcomeName(VoteOutcome o);
VoteOutcome ParseOutcome(std::string_view name);

struct TrueSkillParams {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;
  double tau = 0.0;
  double draw_probability = 0.10;

  // epsilon = Phi^-1((p + 1) / 2) * sqrt(2) * beta
  double DrawMargin() const;
  void Validate() const;
};

struct Rating {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;
  friend bool operator==(const Rating&, const Rating&) = default;
};

// Two-player updates. Returns (first, second) posteriors.
std::pair<Rating, Rating> TrueSkillWin(const Rating& winner, const Rating& loser,
                                       const TrueSkillParams& params);
std::pair<Rating, Rating> TrueSkillDraw(const Rating& a, const Rating& b,
                                        const TrueSkillParams& params);

struct VoteRecord {
  std::uint64_t seq = 0;
  std::string pair_id;
  Indicator indicator = Indicator::kBeingAway;
  std::string left;
  std::string right;
  VoteOutcome outcome = VoteOutcome::kNeither;
  std::int64_t timestamp_ms = 0;
};

// Ratings per image and indicator plus the append-only vote ledger.
class RatingState {
 public:
  explicit RatingState(TrueSkillParams params = {});

  void RegisterImage(const std::string& image_id);
  bool HasImage(const std::string& image_id) const { return images_.contains(image_id); }
  std::size_t image_count() const { return images_.size(); }
  // Ascending image ids.
  std::vector<std::string> ImageIds() const;

  const Rating& GetRating(const std::string& image_id, Indicator indicator) const;
  std::size_t ComparisonCount(const std::string& image_id) const;
  std::size_t IndicatorCount(const std::string& image_id, Indicator indicator) const;
  std::size_t MinComparisonCount() const;

  // Validates, updates ratings, increments both counts and appends to the
  // ledger. The record's seq is assigned here.
  const VoteRecord& Apply(VoteRecord record);

  const std::vector<VoteRecord>& ledger() const { return ledger_; }
  const TrueSkillParams& params() const { return params_; }

  friend bool operator==(const RatingState&, const RatingState&);

 private:
  struct ImageState {
    std::array<Rating, kNumIndicators> ratings;
    std::array<std::size_t, kNumIndicators> indicator_counts{};
    std::size_t comparisons = 0;
  };
  const ImageState& Image(const std::string& id) const;

  TrueSkillParams params_;
  std::map<std::string, ImageState> images_;
  std::vector<VoteRecord> ledger_;
};

// Uniform (seeded) choice among the pairs with minimal summed comparison
// count; the orientation is randomized.
std::pair<std::string, std::string> NextPair(const RatingState& state, Indicator indicator,
                                             std::uint64_t seed);

// Functional form of RatingState::Apply.
RatingState ApplyVote(RatingState state, const std::pair<std::string, std::string>& pair,
                      Indicator indicator, VoteOutcome outcome);

struct CompositeScores {
  std::map<std::string, double> scores;  // mean of the four indicator mu values
  std::vector<std::string> incomplete;   // some indicator never compared
};
CompositeScores ComputeCompositeScores(const RatingState& state);

struct JenksResult {
  std::vector<double> breaks;  // k - 1 ascending upper class bounds
  std::vector<int> classes;    // per input value, in input order
  double ssd = 0.0;            // total within-class squared deviation
};
// Optimal 1-D partition into k contiguous classes (Fisher dynamic program).
JenksResult JenksBreaks(std::span<const double> values, std::size_t k = 3);

struct ScoredSample {
  std::string image_id;
  Point2 location;
  double score = 0.0;
};

struct LabelSet {
  std::map<std::string, int> classes;    // labeled roads only
  std::map<std::string, double> scores;  // mean composite score per labeled road
  std::vector<double> breaks;
};
// Road score = mean score of samples within half_width; Jenks k = 3 on road
// scores gives low / medium / high.
LabelSet LabelRoads(std::span<const ScoredSample> samples, std::span<const RoadSegment> roads,
                    double half_width = kDefaultBufferHalfWidth);

// --- file formats ---------------------------------------------------------

struct ImageEntry {
  std::string image_id;
  std::filesystem::path path;  // resolved against the manifest directory
  Point2 location;
};
// "image_id,path,x,y"
std::vector<ImageEntry> ReadImageManifest(const std::filesystem::path& path);
void WriteImageManifest(const std::filesystem::path& path, std::span<const ImageEntry> images,
                        const std::filesystem::path& relative_to);

// One JSON object per line.
std::string LedgerLine(const VoteRecord& record);
VoteRecord ParseLedgerLine(std::string_view line);
std::vector<VoteRecord> ReadLedger(const std::filesystem::path& path);
// Rebuilds state by re-applying every record in order.
RatingState ReplayLedger(std::span<const std::string> image_ids,
                         std::span<const VoteRecord> ledger, const TrueSkillParams& params);

// "road_id,class,score"
void WriteLabelSet(const std::filesystem::path& path, const LabelSet& labels);

}  // namespace urbanrest

#endif  // URBANREST_LABELING_HPP_
