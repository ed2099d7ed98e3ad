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

#include "urbanrest/fixture.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {
namespace {

namespace fs = std::filesystem;

constexpr double kSpacing = 100.0;
constexpr int kRasterWidth = 96;
constexpr int kRasterHeight = 64;

// Entity vocabulary used by the rasters.
constexpr int kSky = 2, kRoad = 6, kBuilding = 1;
const std::vector<std::vector<int>> kClassPools = {
    {0, 1, 20, 43, 93, 11},   // low: wall, building, car, signboard, pole, sidewalk
    {4, 11, 12, 20, 17, 93},  // medium
    {4, 9, 17, 21, 66, 13},   // high: tree, grass, plant, water, flower, earth
};
const std::map<int, std::string> kVocabulary = {
    {0, "wall"},  {1, "building"}, {2, "sky"},    {4, "tree"},     {6, "road"},
    {9, "grass"}, {11, "sidewalk"}, {12, "person"}, {13, "earth"},  {17, "plant"},
    {20, "car"},  {21, "water"},   {43, "signboard"}, {66, "flower"}, {93, "pole"},
};

std::string RoadId(std::size_t i, std::size_t n) {
  const std::size_t width = std::to_string(n).size();
  std::string digits = std::to_string(i);
  return "r" + std::string(width - std::min(width, digits.size()), '0') + digits;
}

std::vector<RoadSegment> GridRoads(std::size_t count, Rng& rng) {
  std::size_t m = 2;
  while (2 * m * (m - 1) < count) ++m;
  std::vector<RoadSegment> roads;
  for (std::size_t y = 0; y < m && roads.size() < count; ++y) {
    for (std::size_t x = 0; x < m && roads.size() < count; ++x) {
      const Point2 origin{static_cast<double>(x) * kSpacing, static_cast<double>(y) * kSpacing};
      for (int dir = 0; dir < 2 && roads.size() < count; ++dir) {
        if ((dir == 0 && x + 1 == m) || (dir == 1 && y + 1 == m)) continue;
        const Point2 step = dir == 0 ? Point2{kSpacing, 0.0} : Point2{0.0, kSpacing};
        const Point2 normal = dir == 0 ? Point2{0.0, 1.0} : Point2{1.0, 0.0};
        const double bend = rng.Uniform(-5.0, 5.0);
        RoadSegment road;
        road.road_id = RoadId(roads.size(), count);
        road.polyline = {origin,
                         {origin.x + step.x / 2 + normal.x * bend, origin.y + step.y / 2 + normal.y * bend},
                         {origin.x + step.x, origin.y + step.y}};
        roads.push_back(std::move(road));
      }
    }
  }
  return roads;
}

std::vector<double> LatentField(const std::vector<Point2>& mids, const FixtureSpec& spec, Rng& rng) {
  const std::size_t n = mids.size();
  std::vector<double> white(n);
  for (auto& w : white) w = rng.Normal();
  std::vector<double> z = white;
  if (spec.autocorrelated) {
    const double two_l2 = 2.0 * spec.correlation_length * spec.correlation_length;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        const double d = Distance(mids[i], mids[j]);
        s += std::exp(-d * d / two_l2) * white[j];
      }
      z[i] = s;
    }
  }
  double mean = 0.0, var = 0.0;
  for (double v : z) mean += v;
  mean /= static_cast<double>(n);
  for (double v : z) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));
  for (auto& v : z) v = sd > 0.0 ? (v - mean) / sd : 0.0;
  return z;
}

std::vector<int> TercileLabels(const std::vector<double>& z) {
  std::vector<std::size_t> order(z.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return z[a] < z[b]; });
  std::vector<int> labels(z.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    labels[order[r]] = static_cast<int>(std::min<std::size_t>(2, r * 3 / order.size()));
  }
  return labels;
}

SegmentationMap MakeRaster(int label, double signal, Rng& rng) {
  SegmentationMap map;
  map.width = kRasterWidth;
  map.height = kRasterHeight;
  map.classes.assign(static_cast<std::size_t>(kRasterWidth) * kRasterHeight, kBuilding);
  for (int y = 0; y < kRasterHeight; ++y) {
    for (int x = 0; x < kRasterWidth; ++x) {
      int c = kBuilding;
      if (y < kRasterHeight / 3) c = kSky;
      if (y >= kRasterHeight * 3 / 4) c = kRoad;
      map.classes[static_cast<std::size_t>(y) * kRasterWidth + x] = c;
    }
  }
  const double p_own = std::clamp(0.34 + 0.6 * signal, 0.0, 1.0);
  // Higher classes cluster their blobs near the center.
  const double spread = label == 2 ? 18.0 : (label == 1 ? 28.0 : 40.0);
  const int blobs = 4 + static_cast<int>(rng.Below(4));
  for (int b = 0; b < blobs; ++b) {
    const auto& pool =
        rng.Uniform() < p_own ? kClassPools[static_cast<std::size_t>(label)] : kClassPools[rng.Below(3)];
    const int cls = pool[rng.Below(pool.size())];
    const int w = 8 + static_cast<int>(rng.Below(14));
    const int h = 6 + static_cast<int>(rng.Below(10));
    const int cx = static_cast<int>(std::clamp(kRasterWidth / 2.0 + rng.Normal() * spread, 0.0,
                                               static_cast<double>(kRasterWidth - 1)));
    const int cy = static_cast<int>(std::clamp(kRasterHeight / 2.0 + rng.Normal() * spread / 3.0, 0.0,
                                               static_cast<double>(kRasterHeight - 1)));
    for (int y = std::max(0, cy - h / 2); y < std::min(kRasterHeight, cy + h / 2 + 1); ++y) {
      for (int x = std::max(0, cx - w / 2); x < std::min(kRasterWidth, cx + w / 2 + 1); ++x) {
        map.classes[static_cast<std::size_t>(y) * kRasterWidth + x] = cls;
      }
    }
  }
  return map;
}

double StdNormalCdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::vector<VoteRecord> SimulateVotes(const std::vector<std::string>& ids,
                                      const std::vector<double>& quality, Rng& rng,
                                      std::uint64_t seed) {
  RatingState state;
  std::map<std::string, double> q;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    state.RegisterImage(ids[i]);
    q[ids[i]] = quality[i];
  }
  const std::size_t cap = ids.size() * kTargetComparisons * 8;
  std::size_t turn = 0;
  auto complete = [&] {
    if (state.MinComparisonCount() < kTargetComparisons) return false;
    for (const auto& id : ids) {
      for (Indicator ind : kAllIndicators) {
        if (state.IndicatorCount(id, ind) == 0) return false;
      }
    }
    return true;
  };
  while (!complete() && state.ledger().size() < cap) {
    const Indicator ind = kAllIndicators[turn++ % kNumIndicators];
    const auto [left, right] = NextPair(state, ind, seed);
    VoteRecord r;
    r.pair_id = "sim-" + std::to_string(state.ledger().size() + 1);
    r.indicator = ind;
    r.left = left;
    r.right = right;
    const double u = rng.Uniform();
    if (u < 0.08) {
      r.outcome = VoteOutcome::kBoth;
    } else if (u < 0.12) {
      r.outcome = VoteOutcome::kNeither;
    } else {
      const double p_left = StdNormalCdf((q[left] - q[right]) / 0.5);
      r.outcome = rng.Uniform() < p_left ? VoteOutcome::kLeft : VoteOutcome::kRight;
    }
    r.timestamp_ms = 1'700'000'000'000LL + static_cast<std::int64_t>(state.ledger().size()) * 1000;
    state.Apply(r);
  }
  return state.ledger();
}

std::string TinyPpm(double quality) {
  const double t = std::clamp(0.5 + quality / 4.0, 0.0, 1.0);
  const auto g = static_cast<unsigned char>(60 + 180 * t);
  const auto r = static_cast<unsigned char>(200 - 150 * t);
  std::string out = "P6\n16 16\n255\n";
  for (int i = 0; i < 256; ++i) {
    out.push_back(static_cast<char>(r));
    out.push_back(static_cast<char>(g));
    out.push_back(static_cast<char>(90));
  }
  return out;
}

}  // namespace

void FixtureSpec::Validate() const {
  if (roads < 10) ThrowUsage("fixture needs at least 10 roads");
  if (!(noise >= 0.0) || !std::isfinite(signal)) ThrowUsage("fixture signal/noise out of range");
  if (points_per_road < 1) ThrowUsage("fixture needs at least one point per road");
  if (!(correlation_length > 0.0)) ThrowUsage("fixture correlation length must be positive");
  for (const auto& g : signal_groups) {
    if (std::find(std::begin(kFeatureGroups), std::end(kFeatureGroups), g) == std::end(kFeatureGroups)) {
      ThrowUsage("unknown feature group '" + g + "'");
    }
  }
}

FixtureData GenerateFixture(const FixtureSpec& spec) {
  spec.Validate();
  FixtureData data;
  data.spec = spec;
  Rng geo_rng(MixSeed(spec.seed, 31));
  data.roads = GridRoads(spec.roads, geo_rng);
  std::vector<Point2> mids;
  for (const auto& r : data.roads) mids.push_back(ArcMidpoint(r));

  Rng field_rng(MixSeed(spec.seed, 32));
  data.latent = LatentField(mids, spec, field_rng);
  const std::vector<int> labels = TercileLabels(data.latent);
  for (std::size_t i = 0; i < data.roads.size(); ++i) data.labels[data.roads[i].road_id] = labels[i];

  // Feature points near each midpoint so each falls in its own road's buffer.
  const std::size_t dims[3] = {spec.perception_dims, spec.spatial_dims, spec.socioeconomic_dims};
  auto& table = data.points;
  std::vector<double> loading;
  std::vector<bool> carries;
  Rng point_rng(MixSeed(spec.seed, 33));
  for (std::size_t g = 0; g < 3; ++g) {
    table.schema.dims[g] = dims[g];
    const bool signal_group =
        std::find(spec.signal_groups.begin(), spec.signal_groups.end(), kFeatureGroups[g]) !=
        spec.signal_groups.end();
    for (std::size_t d = 0; d < dims[g]; ++d) {
      table.column_names.push_back(std::string(kFeatureGroups[g]) + ".f" + std::to_string(d));
      loading.push_back(point_rng.Uniform() < 0.5 ? -1.0 : 1.0);
      carries.push_back(signal_group);
    }
  }
  for (std::size_t i = 0; i < data.roads.size(); ++i) {
    for (std::size_t p = 0; p < spec.points_per_road; ++p) {
      FeaturePoint fp;
      const double angle = point_rng.Uniform(0.0, 2.0 * std::numbers::pi);
      const double radius = point_rng.Uniform(0.0, 8.0);
      fp.location = {mids[i].x + radius * std::cos(angle), mids[i].y + radius * std::sin(angle)};
      for (std::size_t c = 0; c < loading.size(); ++c) {
        const double mean = carries[c] ? spec.signal * loading[c] * data.latent[i] : 0.0;
        fp.values.push_back(mean + spec.noise * point_rng.Normal());
      }
      table.points.push_back(std::move(fp));
    }
  }

  for (const auto& [id, name] : kVocabulary) data.class_names.Set(id, name);
  Rng raster_rng(MixSeed(spec.seed, 34));
  for (std::size_t i = 0; i < data.roads.size(); ++i) {
    for (std::size_t k = 0; k < spec.images_per_road; ++k) {
      SegmentationMap map = MakeRaster(labels[i], spec.signal, raster_rng);
      map.road_id = data.roads[i].road_id;
      map.image_id = data.roads[i].road_id + "_s" + std::to_string(k);
      data.rasters.push_back(std::move(map));
    }
  }

  if (spec.rating_corpus) {
    Rng image_rng(MixSeed(spec.seed, 35));
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < data.roads.size(); ++i) {
      ImageEntry e;
      e.image_id = "img" + data.roads[i].road_id.substr(1);
      e.path = fs::path("images") / (e.image_id + ".ppm");
      e.location = {mids[i].x + image_rng.Uniform(-5.0, 5.0), mids[i].y + image_rng.Uniform(-5.0, 5.0)};
      ids.push_back(e.image_id);
      data.images.push_back(std::move(e));
    }
    data.ledger = SimulateVotes(ids, data.latent, image_rng, MixSeed(spec.seed, 36));
  }
  return data;
}

void WriteFixture(const FixtureData& data, const fs::path& dir) {
  fs::create_directories(dir);
  WriteRoads(dir / "roads.txt", data.roads);
  WriteFeaturePoints(dir / "feature_points.txt", data.points);
  WriteLabels(dir / "labels.csv", data.labels);

  std::ostringstream names;
  names << io::FormatHeader("class-names") << '\n';
  for (const auto& [id, name] : kVocabulary) names << id << ' ' << name << '\n';
  io::WriteFile(dir / "class_names.txt", names.str());

  std::ostringstream config;
  config << "# urbanrest pipeline configuration for a generated fixture\n"
         << "[paths]\n"
         << "roads = roads.txt\n"
         << "feature_points = feature_points.txt\n"
         << "labels = labels.csv\n"
         << "class_names = class_names.txt\n"
         << "out_dir = out\n";

  if (!data.rasters.empty()) {
    std::ostringstream manifest;
    manifest << io::FormatHeader("raster-manifest") << '\n';
    for (const auto& map : data.rasters) {
      const fs::path rel = fs::path("rasters") / (map.image_id + ".seg");
      WriteSegmentationRaster(dir / rel, map);
      manifest << rel.generic_string() << ',' << map.road_id << '\n';
    }
    io::WriteFile(dir / "rasters.csv", manifest.str());
    config << "rasters = rasters.csv\n";
  }

  if (!data.images.empty()) {
    std::vector<ImageEntry> resolved = data.images;
    std::map<std::string, double> quality;
    for (std::size_t i = 0; i < data.roads.size(); ++i) {
      quality["img" + data.roads[i].road_id.substr(1)] = data.latent[i];
    }
    for (auto& e : resolved) {
      io::WriteFile(dir / e.path, TinyPpm(quality[e.image_id]));
      e.path = dir / e.path;
    }
    WriteImageManifest(dir / "images.csv", resolved, dir);
    std::ostringstream ledger;
    ledger << io::FormatHeader("ledger") << '\n';
    for (const auto& r : data.ledger) ledger << LedgerLine(r) << '\n';
    io::WriteFile(dir / "ledger.jsonl", ledger.str());
    config << "images = images.csv\n"
           << "ledger = ledger.jsonl\n";
  }
  config << "\n[model]\n"
         << "arch = gat\n"
         << "epochs = 200\n"
         << "seed = " << data.spec.seed << "\n";
  io::WriteFile(dir / "urbanrest.conf", config.str());
}

CityGraph FixtureCityGraph(const FixtureData& data, const CityGraphOptions& options) {
  return AssembleCityGraph(data.roads, data.points.points, data.points.schema, data.labels, options);
}

}  // namespace urbanrest
