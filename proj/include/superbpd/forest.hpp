// Copyright 2026 The superbpd Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "superbpd/core.hpp"

// Super-BPD partition: every pixel links to the neighbor its direction points
// at when the two directions agree, producing a forest of parent pointers
// whose trees are the super-BPDs.

namespace superbpd {

struct PartitionConfig {
  double theta_a_deg = 45.0;  // direction-agreement threshold

  void validate() const {
    if (!(theta_a_deg > 0.0 && theta_a_deg < 180.0))
      throw Error(ErrorKind::InvalidArgument,
                  "theta_a must lie in (0, 180) degrees, got " +
                      std::to_string(theta_a_deg));
  }
};

/// Parent image plus its root pixels (self-parented, ascending index).
struct ParentForest : RasterShape {
  std::vector<PixelIndex> parent;
  std::vector<PixelIndex> roots;

  ParentForest() = default;
  ParentForest(int width, int height)
      : RasterShape(width, height), parent(size()) {
    for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = PixelIndex(i);
  }

  bool is_root(PixelIndex p) const { return parent[std::size_t(p)] == p; }

  friend bool operator==(const ParentForest& a, const ParentForest& b) {
    return a.same_shape(b) && a.parent == b.parent && a.roots == b.roots;
  }
};

/// Directions are stored as float32, so an angle that is mathematically equal
/// to the agreement threshold can land on either side of it after rounding
/// (axis-aligned vs. diagonal neighbors differ by exactly 45 degrees on
/// rasterized boundaries). Angles within this margin of the threshold group.
inline constexpr double kAngleTolerance = 1e-6;

/// The neighbor pixel `p` points at, or nullopt if it lies off the raster.
inline std::optional<PixelIndex> next_pixel(const DirectionField& field, PixelIndex p) {
  const Pixel px = field.pixel(p);
  const auto& off = kNeighbors8[std::size_t(pointed_neighbor(field[std::size_t(p)]))];
  const int r = px.row + off.dr;
  const int c = px.col + off.dc;
  if (!field.contains(r, c)) return std::nullopt;
  return field.index(r, c);
}

/// Promotes the smallest pixel of every parent cycle to a root, then rebuilds
/// the root list. Parents form a functional graph, so each walk ends either at
/// an already-resolved pixel or on a cycle of the current walk.
inline void finalize_forest(ParentForest& forest) {
  const std::size_t n = forest.size();
  std::vector<std::int32_t> walk_of(n, -1);
  std::vector<std::uint8_t> done(n, 0);
  std::vector<PixelIndex> path;
  for (std::size_t start = 0; start < n; ++start) {
    if (done[start]) continue;
    path.clear();
    const auto walk = std::int32_t(start);
    PixelIndex cur = PixelIndex(start);
    while (!done[std::size_t(cur)] && walk_of[std::size_t(cur)] != walk) {
      walk_of[std::size_t(cur)] = walk;
      path.push_back(cur);
      cur = forest.parent[std::size_t(cur)];
    }
    if (!done[std::size_t(cur)]) {
      // `cur` lies on a cycle discovered during this walk.
      PixelIndex smallest = cur;
      for (PixelIndex q = forest.parent[std::size_t(cur)]; q != cur;
           q = forest.parent[std::size_t(q)])
        smallest = std::min(smallest, q);
      forest.parent[std::size_t(smallest)] = smallest;
    }
    for (PixelIndex q : path) done[std::size_t(q)] = 1;
  }
  forest.roots.clear();
  for (std::size_t i = 0; i < n; ++i)
    if (forest.parent[i] == PixelIndex(i)) forest.roots.push_back(PixelIndex(i));
}

inline ParentForest build_forest(const DirectionField& field,
                                 const PartitionConfig& cfg = {}) {
  cfg.validate();
  const double theta = deg_to_rad(cfg.theta_a_deg) + kAngleTolerance;
  ParentForest forest(field.width(), field.height());
  const int h = field.height();
  const int w = field.width();
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c < w; ++c) {
      const PixelIndex p = field.index(r, c);
      const Vec2f& v = field[std::size_t(p)];
      const auto& off = kNeighbors8[std::size_t(pointed_neighbor(v))];
      const int nr = r + off.dr;
      const int nc = c + off.dc;
      if (!field.contains(nr, nc)) continue;
      const PixelIndex q = field.index(nr, nc);
      if (clamped_angle(dot(v, field[std::size_t(q)])) < theta)
        forest.parent[std::size_t(p)] = q;
    }
  }
  finalize_forest(forest);
  return forest;
}

/// Root of `p` by plain parent chasing.
inline PixelIndex find_root(const ParentForest& forest, PixelIndex p) {
  while (forest.parent[std::size_t(p)] != p) p = forest.parent[std::size_t(p)];
  return p;
}

/// Per-pixel root, resolved in O(N) with memoization.
inline std::vector<PixelIndex> resolve_roots(const ParentForest& forest) {
  const std::size_t n = forest.size();
  std::vector<PixelIndex> root(n, -1);
  std::vector<PixelIndex> path;
  for (std::size_t i = 0; i < n; ++i) {
    if (root[i] >= 0) continue;
    path.clear();
    PixelIndex cur = PixelIndex(i);
    while (root[std::size_t(cur)] < 0 && forest.parent[std::size_t(cur)] != cur) {
      path.push_back(cur);
      cur = forest.parent[std::size_t(cur)];
    }
    const PixelIndex r = root[std::size_t(cur)] >= 0 ? root[std::size_t(cur)] : cur;
    root[std::size_t(cur)] = r;
    for (PixelIndex q : path) root[std::size_t(q)] = r;
  }
  return root;
}

/// Same forest with every pixel pointing directly at its root.
inline ParentForest compress(const ParentForest& forest) {
  ParentForest out = forest;
  out.parent = resolve_roots(forest);
  return out;
}

/// Labels each pixel with the position of its root in `forest.roots`.
inline LabelMap flatten(const ParentForest& forest) {
  const std::vector<PixelIndex> root = resolve_roots(forest);
  std::vector<Label> ordinal(forest.size(), 0);
  for (std::size_t k = 0; k < forest.roots.size(); ++k)
    ordinal[std::size_t(forest.roots[k])] = Label(k);
  LabelMap out(forest.width(), forest.height());
  for (std::size_t i = 0; i < forest.size(); ++i) out[i] = ordinal[std::size_t(root[i])];
  return out;
}

}  // namespace superbpd
