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

#ifndef URBANREST_GEOMETRY_HPP_
#define URBANREST_GEOMETRY_HPP_

#include <span>

namespace urbanrest {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

double Distance(Point2 a, Point2 b);

// Euclidean distance from p to the closed segment [a, b].
double PointSegmentDistance(Point2 p, Point2 a, Point2 b);

// Minimum distance between closed segments [a, b] and [c, d]; zero when they
// intersect or touch.
double SegmentSegmentDistance(Point2 a, Point2 b, Point2 c, Point2 d);

// Minimum distance from p to any segment of the polyline.
double PointPolylineDistance(Point2 p, std::span<const Point2> polyline);

double PolylineLength(std::span<const Point2> polyline);

}  // namespace urbanrest

#endif  // URBANREST_GEOMETRY_HPP_
