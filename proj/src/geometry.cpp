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

#include "urbanrest/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace urbanrest {
namespace {

double Cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

int Sign(double v) { return (v > 0.0) - (v < 0.0); }

bool OnSegment(Point2 p, Point2 a, Point2 b) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
         std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

bool SegmentsIntersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const int d1 = Sign(Cross(c, d, a));
  const int d2 = Sign(Cross(c, d, b));
  const int d3 = Sign(Cross(a, b, c));
  const int d4 = Sign(Cross(a, b, d));
  if (d1 * d2 < 0 && d3 * d4 < 0) return true;
  if (d1 == 0 && OnSegment(a, c, d)) return true;
  if (d2 == 0 && OnSegment(b, c, d)) return true;
  if (d3 == 0 && OnSegment(c, a, b)) return true;
  if (d4 == 0 && OnSegment(d, a, b)) return true;
  return false;
}

}  // namespace

double Distance(Point2 a, Point2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

double PointSegmentDistance(Point2 p, Point2 a, Point2 b) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  if (len2 == 0.0) return Distance(p, a);
  double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return Distance(p, Point2{a.x + t * dx, a.y + t * dy});
}

double SegmentSegmentDistance(Point2 a, Point2 b, Point2 c, Point2 d) {
  if (SegmentsIntersect(a, b, c, d)) return 0.0;
  return std::min({PointSegmentDistance(a, c, d), PointSegmentDistance(b, c, d),
                   PointSegmentDistance(c, a, b), PointSegmentDistance(d, a, b)});
}

double PointPolylineDistance(Point2 p, std::span<const Point2> polyline) {
  if (polyline.size() == 1) return Distance(p, polyline[0]);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    best = std::min(best, PointSegmentDistance(p, polyline[i], polyline[i + 1]));
  }
  return best;
}

double PolylineLength(std::span<const Point2> polyline) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < polyline.size(); ++i) {
    total += Distance(polyline[i], polyline[i + 1]);
  }
  return total;
}

}  // namespace urbanrest
