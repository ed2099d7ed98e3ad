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

#ifndef URBANREST_ADJACENCY_HPP_
#define URBANREST_ADJACENCY_HPP_

#include <cstddef>
#include <utility>
#include <vector>

namespace urbanrest {

// Undirected simple graph over nodes 0..n-1 as sorted neighbor lists.
// No self-loops; edge (i, j) appears in both lists.
class Adjacency {
 public:
  Adjacency() = default;
  explicit Adjacency(std::size_t n) : neighbors_(n) {}

  // Adds (i, j) and (j, i); duplicates are ignored. Throws on self-loops.
  void AddEdge(std::size_t i, std::size_t j);
  bool HasEdge(std::size_t i, std::size_t j) const;

  std::size_t n() const { return neighbors_.size(); }
  const std::vector<std::size_t>& Neighbors(std::size_t i) const { return neighbors_[i]; }
  std::size_t Degree(std::size_t i) const { return neighbors_[i].size(); }
  // Undirected edge count.
  std::size_t EdgeCount() const;
  // (i, j) pairs with i < j, ascending.
  std::vector<std::pair<std::size_t, std::size_t>> Edges() const;

  friend bool operator==(const Adjacency&, const Adjacency&) = default;

 private:
  std::vector<std::vector<std::size_t>> neighbors_;
};

}  // namespace urbanrest

#endif  // URBANREST_ADJACENCY_HPP_
