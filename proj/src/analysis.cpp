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

#include "urbanrest/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "urbanrest/error.hpp"
#include "urbanrest/io_util.hpp"
#include "urbanrest/log.hpp"
#include "urbanrest/rng.hpp"

namespace urbanrest {
namespace {

double SquaredDistance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::size_t DistinctRows(const DenseMatrix& x) {
  std::set<std::vector<double>> rows;
  for (std::size_t i = 0; i < x.rows(); ++i) rows.emplace(x.Row(i).begin(), x.Row(i).end());
  return rows.size();
}

DenseMatrix PlusPlusSeeds(const DenseMatrix& x, std::size_t k, Rng& rng) {
  const std::size_t n = x.rows();
  DenseMatrix centers(k, x.cols());
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t pick = rng.Below(n);
  for (std::size_t c = 0; c < k; ++c) {
    std::copy(x.Row(pick).begin(), x.Row(pick).end(), centers.Row(c).begin());
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x.Row(i), centers.Row(c)));
      total += d2[i];
    }
    if (c + 1 == k) break;
    double r = rng.Uniform() * total;
    pick = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      if (r < d2[i]) {
        pick = i;
        break;
      }
      r -= d2[i];
    }
    if (pick == n) {  // rounding at the tail: last point with positive weight
      for (std::size_t i = n; i-- > 0;) {
        if (d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    }
  }
  return centers;
}

double Assign(const DenseMatrix& x, const DenseMatrix& centers, std::vector<int>& assign) {
  double sse = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    int arg = 0;
    for (std::size_t c = 0; c < centers.rows(); ++c) {
      const double d = SquaredDistance(x.Row(i), centers.Row(c));
      if (d < best) {
        best = d;
        arg = static_cast<int>(c);
      }
    }
    assign[i] = arg;
    sse += best;
  }
  return sse;
}

ClusterResult LloydRun(const DenseMatrix& x, std::size_t k, Rng& rng, const KMeansOptions& opt) {
  const std::size_t n = x.rows();
  const std::size_t d = x.cols();
  ClusterResult r;
  r.k = k;
  r.centers = PlusPlusSeeds(x, k, rng);
  r.assignments.assign(n, 0);
  for (std::size_t it = 0; it < opt.max_iterations; ++it) {
    r.sse = Assign(x, r.centers, r.assignments);
    r.sse_trace.push_back(r.sse);
    r.iterations = it + 1;
    DenseMatrix next(k, d);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto c = static_cast<std::size_t>(r.assignments[i]);
      ++counts[c];
      for (std::size_t j = 0; j < d; ++j) next(c, j) += x(i, j);
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] == 0) {
        // Empty cluster: move it to the point farthest from its center.
        std::size_t far = 0;
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double dist =
              SquaredDistance(x.Row(i), r.centers.Row(static_cast<std::size_t>(r.assignments[i])));
          if (dist > far_d) {
            far_d = dist;
            far = i;
          }
        }
        std::copy(x.Row(far).begin(), x.Row(far).end(), next.Row(c).begin());
        continue;
      }
      for (std::size_t j = 0; j < d; ++j) next(c, j) /= static_cast<double>(counts[c]);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      shift = std::max(shift, std::sqrt(SquaredDistance(next.Row(c), r.centers.Row(c))));
    }
    r.centers = std::move(next);
    if (shift < opt.tolerance) break;
  }
  r.sse = Assign(x, r.centers, r.assignments);
  if (r.sse < r.sse_trace.back()) r.sse_trace.push_back(r.sse);
  return r;
}

double SilhouetteFromDistances(const std::vector<double>& dist, std::size_t n,
                               std::span<const int> assign) {
  int k = 0;
  for (int a : assign) k = std::max(k, a + 1);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int a : assign) ++sizes[static_cast<std::size_t>(a)];
  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(assign[i]);
    if (sizes[own] <= 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) sums[static_cast<std::size_t>(assign[j])] += dist[i * n + j];
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c == own || sizes[c] == 0) continue;
      b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    if (!std::isfinite(b)) continue;
    const double m = std::max(a, b);
    if (m > 0.0) total += (b - a) / m;
  }
  return total / static_cast<double>(n);
}

std::vector<double> DistanceMatrix(const DenseMatrix& x) {
  const std::size_t n = x.rows();
  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist[i * n + j] = dist[j * n + i] = std::sqrt(SquaredDistance(x.Row(i), x.Row(j)));
    }
  }
  return dist;
}

}  // namespace

ClusterResult KMeans(const DenseMatrix& x, std::size_t k, std::uint64_t seed,
                     const KMeansOptions& options) {
  if (k < 2) ThrowUsage("kmeans needs k >= 2");
  if (k > x.rows()) {
    ThrowData("kmeans: k = " + std::to_string(k) + " exceeds " + std::to_string(x.rows()) + " points");
  }
  if (!x.AllFinite()) ThrowNumeric("kmeans: non-finite input");
  if (DistinctRows(x) < k) ThrowData("degenerate breaks in data: fewer distinct points than k");
  if (options.restarts == 0 || options.max_iterations == 0) {
    ThrowUsage("kmeans restarts and max_iterations must be >= 1");
  }
  Rng rng(MixSeed(seed, 21));
  ClusterResult best;
  for (std::size_t r = 0; r < options.restarts; ++r) {
    ClusterResult run = LloydRun(x, k, rng, options);
    if (r == 0 || run.sse < best.sse) best = std::move(run);
  }
  best.seed = seed;
  best.silhouette = Silhouette(x, best.assignments);
  return best;
}

double Silhouette(const DenseMatrix& x, std::span<const int> assignments) {
  if (assignments.size() != x.rows()) ThrowUsage("silhouette: assignment count mismatch");
  if (x.rows() == 0) return 0.0;
  return SilhouetteFromDistances(DistanceMatrix(x), x.rows(), assignments);
}

SilhouetteSweepResult SilhouetteSweep(const DenseMatrix& x, std::size_t k_min, std::size_t k_max,
                                      std::uint64_t seed, const KMeansOptions& options) {
  if (k_min < 2 || k_max < k_min) ThrowUsage("silhouette sweep needs 2 <= k_min <= k_max");
  if (x.rows() <= k_max) {
    ThrowData("silhouette sweep needs more than " + std::to_string(k_max) + " points");
  }
  const std::vector<double> dist = DistanceMatrix(x);
  SilhouetteSweepResult out;
  for (std::size_t k = k_min; k <= k_max; ++k) {
    ClusterResult r = KMeans(x, k, MixSeed(seed, k), options);
    r.silhouette = SilhouetteFromDistances(dist, x.rows(), r.assignments);
    out.ks.push_back(k);
    out.scores.push_back(r.silhouette);
    if (out.best_k == 0 || r.silhouette > out.best.silhouette) {
      out.best_k = k;
      out.best = std::move(r);
    }
  }
  return out;
}

std::vector<GroupStructure> ClassStructureGraphs(
    const std::map<std::string, std::vector<EntityGraph>>& groups, std::size_t top_k) {
  std::vector<GroupStructure> out;
  for (const auto& [name, graphs] : groups) {
    if (graphs.empty()) {
      log::Warn("structure report: group '" + name + "' has no roads, skipped");
      continue;
    }
    GroupStructure g;
    g.group = name;
    g.road_count = graphs.size();
    g.merged = MergeRoadGraphs(graphs);
    if (g.merged.node_count() < 2) {
      log::Warn("structure report: group '" + name + "' has fewer than 2 entity classes, skipped");
      continue;
    }
    g.top = TopCentrality(g.merged, top_k);
    out.push_back(std::move(g));
  }
  return out;
}

std::string FormatStructureReport(std::span<const GroupStructure> groups, const ClassNames& names) {
  std::ostringstream out;
  out << io::FormatHeader("structure-report") << '\n';
  std::size_t rows = 0;
  for (const auto& g : groups) rows = std::max(rows, g.top.size());
  out << "rank";
  for (const auto& g : groups) out << '\t' << g.group << " (" << g.road_count << " roads)\t";
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    out << r + 1;
    for (const auto& g : groups) {
      if (r < g.top.size()) {
        std::ostringstream c;
        c.setf(std::ios::fixed);
        c.precision(4);
        c << g.top[r].centrality;
        out << '\t' << names.Name(g.top[r].class_id) << '\t' << c.str();
      } else {
        out << "\t\t";
      }
    }
    out << '\n';
  }
  return out.str();
}

void WriteSilhouetteTable(const std::filesystem::path& path, const SilhouetteSweepResult& sweep) {
  std::ostringstream out;
  out << io::FormatHeader("silhouette") << '\n';
  out << "# best_k " << sweep.best_k << '\n';
  out << "k,silhouette\n";
  for (std::size_t i = 0; i < sweep.ks.size(); ++i) {
    out << sweep.ks[i] << ',' << io::FormatDouble(sweep.scores[i]) << '\n';
  }
  io::WriteFile(path, out.str());
}

void WriteClusterAssignments(const std::filesystem::path& path,
                             std::span<const std::string> road_ids, const ClusterResult& result) {
  if (road_ids.size() != result.assignments.size()) {
    ThrowUsage("cluster assignments: road id count mismatch");
  }
  std::ostringstream out;
  out << io::FormatHeader("clusters") << '\n';
  out << "# k " << result.k << " seed " << result.seed << " silhouette "
      << io::FormatDouble(result.silhouette) << '\n';
  out << "road_id,cluster\n";
  for (std::size_t i = 0; i < road_ids.size(); ++i) {
    out << road_ids[i] << ',' << result.assignments[i] << '\n';
  }
  io::WriteFile(path, out.str());
}

}  // namespace urbanrest
