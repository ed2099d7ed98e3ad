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

#include "urbanrest/adjacency.hpp"

#include <algorithm>

#include "urbanrest/error.hpp"

namespace urbanrest {
namespace {

void InsertSorted(std::vector<std::size_t>& v, std::size_t x) {
  const auto it = std::lower_bound(v.begin(), v.end(), x);
  if (it == v.end() || *it != x) v.insert(it, x);
}

}  // namespace

void Adjacency::AddEdge(std::size_t i, std::size_t j) {
  if (i >= n() || j >= n()) ThrowData("adjacency edge out of range");
  if (i == j) ThrowData("adjacency self-loop at node " + std::to_string(i));
  InsertSorted(neighbors_[i], j);
  InsertSorted(neighbors_[j], i);
}

bool Adjacency::HasEdge(std::size_t i, std::size_t j) const {
  if (i >= n() || j >= n()) return false;
  return std::binary_search(neighbors_[i].begin(), neighbors_[i].end(), j);
}

std::size_t Adjacency::EdgeCount() const {
  std::size_t total = 0;
  for (const auto& nb : neighbors_) total += nb.size();
  return total / 2;
}

std::vector<std::pair<std::size_t, std::size_t>> Adjacency::Edges() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < n(); ++i) {
    for (std::size_t j : neighbors_[i]) {
      if (i < j) out.emplace_back(i, j);
    }
  }
  return out;
}

}  // namespace urbanrest
