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

#ifndef URBANREST_FIXTURE_HPP_
#define URBANREST_FIXTURE_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "urbanrest/city_graph.hpp"
#include "urbanrest/entity_graph.hpp"
#include "urbanrest/labeling.hpp"

namespace urbanrest {

// Synthetic city: grid roads, a latent quality field, labels from its
// terciles, and noisy observations of the field.
struct FixtureSpec {
  std::size_t roads = 10;
  double signal = 1.0;  // loading of the latent field on signal columns
  double noise = 1.0;   // per-point observation noise
  std::uint64_t seed = 1;
  bool autocorrelated = true;
  double correlation_length = 150.0;  // meters; grid spacing is 100
  std::size_t points_per_road = 4;
  // Subset of kFeatureGroups whose columns load on the latent field.
  std::vector<std::string> signal_groups = {"perception", "spatial", "socioeconomic"};
  std::size_t perception_dims = 6;
  std::size_t spatial_dims = 4;
  std::size_t socioeconomic_dims = 4;
  std::size_t images_per_road = 2;  // segmentation rasters; 0 disables
  bool rating_corpus = true;        // street images, manifest, simulated ledger

  void Validate() const;
};

struct FixtureData {
  FixtureSpec spec;
  std::vector<RoadSegment> roads;
  std::vector<double> latent;  // per road, standardized
  std::map<std::string, int> labels;
  FeaturePointTable points;
  std::vector<SegmentationMap> rasters;
  ClassNames class_names;
  std::vector<ImageEntry> images;  // paths relative to the fixture directory
  std::vector<VoteRecord> ledger;
};

FixtureData GenerateFixture(const FixtureSpec& spec);

// Writes the dataset plus an urbanrest.conf pointing at it.
void WriteFixture(const FixtureData& data, const std::filesystem::path& dir);

// City graph from the fixture's roads, points and labels (no street vectors).
CityGraph FixtureCityGraph(const FixtureData& data, const CityGraphOptions& options = {});

}  // namespace urbanrest

#endif  // URBANREST_FIXTURE_HPP_
