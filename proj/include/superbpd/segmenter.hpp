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

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "superbpd/core.hpp"
#include "superbpd/forest.hpp"

// Segmentation from a super-BPD forest: nearby roots are merged into initial
// segments, the segments form a region adjacency graph whose edges are scored
// by direction similarity, and the graph is partitioned greedily with
// size-adaptive thresholds under repulsion constraints.

namespace superbpd {

struct SegConfig {
  int steps = 3;                        // parent steps walked before comparing directions
  double s0 = kPi / 18.0;               // repulsion threshold (radians)
  double theta_l = deg_to_rad(150.0);   // merge threshold when both regions are large
  double theta_s = deg_to_rad(115.0);   // merge threshold otherwise
  std::int64_t a_s = 1500;              // "large" area threshold (pixels)
  std::int64_t a_t = 200;               // "tiny" area threshold (pixels)

  void validate() const {
    auto fail = [](const std::string& msg) {
      throw Error(ErrorKind::InvalidArgument, msg);
    };
    if (steps < 0) fail("steps must be >= 0");
    if (!(s0 >= 0.0 && s0 <= kPi)) fail("s0 must lie in [0, pi]");
    if (!(theta_s >= 0.0 && theta_l <= kPi)) fail("theta_s/theta_l must lie in [0, pi]");
    if (!(theta_s < theta_l)) fail("theta_s must be smaller than theta_l");
    if (!(a_t > 0)) fail("a_t must be positive");
    if (!(a_t < a_s)) fail("a_t must be smaller than a_s");
  }
};

/// Bottom half of the 3x3 window, in the order used to pick the "last" root.
inline constexpr std::array<std::pair<int, int>, 4> kForwardWindow{{
    {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

/// Links every root to the last root found in its forward 3x3 half-window.
/// Links always point raster-forward, so the result stays acyclic.
inline ParentForest merge_nearby_roots(const ParentForest& forest) {
  ParentForest out = forest;
  std::vector<std::uint8_t> is_root(forest.size(), 0);
  for (PixelIndex r : forest.roots) is_root[std::size_t(r)] = 1;

  std::vector<PixelIndex> kept;
  kept.reserve(forest.roots.size());
  for (PixelIndex r : forest.roots) {
    const Pixel px = forest.pixel(r);
    PixelIndex target = -1;
    for (const auto& [dr, dc] : kForwardWindow) {
      const int nr = px.row + dr;
      const int nc = px.col + dc;
      if (!forest.contains(nr, nc)) continue;
      const PixelIndex q = forest.index(nr, nc);
      if (is_root[std::size_t(q)]) target = q;
    }
    if (target >= 0)
      out.parent[std::size_t(r)] = target;
    else
      kept.push_back(r);
  }
  out.roots = std::move(kept);
  return out;
}

using BoundaryPair = std::pair<PixelIndex, PixelIndex>;

struct RagEdge {
  std::int32_t a = 0;        // region ids, a < b
  std::int32_t b = 0;
  PixelIndex root_a = 0;
  PixelIndex root_b = 0;
  std::vector<BoundaryPair> boundary;  // (pixel in a, pixel in b), discovery order
  double similarity = 0.0;
};

/// Region adjacency graph over initial segments. Region i is the segment
/// rooted at roots[i].
struct RegionGraph : RasterShape {
  std::vector<PixelIndex> roots;
  std::vector<std::int64_t> area;
  std::vector<RagEdge> edges;

  std::size_t region_count() const noexcept { return roots.size(); }
};

inline RegionGraph build_rag(const LabelMap& labels, const ParentForest& forest) {
  require_same_shape(labels, forest, "build_rag");
  const std::size_t nreg = forest.roots.size();
  RegionGraph g;
  static_cast<RasterShape&>(g) = labels;
  g.roots = forest.roots;
  g.area.assign(nreg, 0);
  for (Label l : labels.labels()) {
    if (l >= nreg)
      throw Error(ErrorKind::InvalidArgument,
                  "build_rag: label " + std::to_string(l) + " has no root");
    ++g.area[l];
  }

  // Boundary pixel pairs in raster discovery order, bucketed by the smaller
  // region id (counting sort keeps discovery order within a bucket).
  struct Pair {
    std::int32_t hi;
    PixelIndex p;  // pixel in the lower region
    PixelIndex q;  // pixel in the higher region
  };
  std::vector<std::int32_t> start(nreg + 1, 0);
  const int h = labels.height();
  const int w = labels.width();
  auto for_each_pair = [&](auto&& fn) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        const PixelIndex p = labels.index(r, c);
        const Label lp = labels[std::size_t(p)];
        if (c + 1 < w && labels[std::size_t(p) + 1] != lp) fn(p, p + 1);
        if (r + 1 < h && labels[std::size_t(p) + std::size_t(w)] != lp) fn(p, p + w);
      }
    }
  };
  for_each_pair([&](PixelIndex p, PixelIndex q) {
    ++start[std::min(labels[std::size_t(p)], labels[std::size_t(q)]) + 1];
  });
  for (std::size_t i = 0; i < nreg; ++i) start[i + 1] += start[i];
  std::vector<Pair> pairs(static_cast<std::size_t>(start[nreg]));
  {
    std::vector<std::int32_t> fill(start.begin(), start.end() - 1);
    for_each_pair([&](PixelIndex p, PixelIndex q) {
      Label lp = labels[std::size_t(p)];
      Label lq = labels[std::size_t(q)];
      if (lp > lq) {
        std::swap(lp, lq);
        std::swap(p, q);
      }
      pairs[std::size_t(fill[lp]++)] = {std::int32_t(lq), p, q};
    });
  }

  // Within a bucket, group by the larger id; edges come out sorted by (a, b),
  // which is (root_a, root_b) order since roots ascend with region id.
  std::vector<std::int32_t> slot(nreg, -1);
  std::vector<std::int32_t> his;
  for (std::size_t lo = 0; lo < nreg; ++lo) {
    his.clear();
    for (std::int32_t k = start[lo]; k < start[lo + 1]; ++k) {
      const std::int32_t hi = pairs[std::size_t(k)].hi;
      if (slot[std::size_t(hi)] < 0) {
        slot[std::size_t(hi)] = 0;
        his.push_back(hi);
      }
      ++slot[std::size_t(hi)];
    }
    std::sort(his.begin(), his.end());
    const std::size_t first = g.edges.size();
    for (std::int32_t hi : his) {
      RagEdge e;
      e.a = std::int32_t(lo);
      e.b = hi;
      e.root_a = g.roots[lo];
      e.root_b = g.roots[std::size_t(hi)];
      e.boundary.reserve(std::size_t(slot[std::size_t(hi)]));
      slot[std::size_t(hi)] = std::int32_t(g.edges.size());
      g.edges.push_back(std::move(e));
    }
    for (std::int32_t k = start[lo]; k < start[lo + 1]; ++k) {
      const Pair& pr = pairs[std::size_t(k)];
      g.edges[std::size_t(slot[std::size_t(pr.hi)])].boundary.emplace_back(pr.p, pr.q);
    }
    for (std::size_t i = first; i < g.edges.size(); ++i) slot[std::size_t(g.edges[i].b)] = -1;
  }
  return g;
}

/// Pixel reached after `steps` parent steps, stopping early at a root.
inline PixelIndex walk_parents(const ParentForest& forest, PixelIndex p, int steps) {
  for (int i = 0; i < steps; ++i) {
    const PixelIndex q = forest.parent[std::size_t(p)];
    if (q == p) break;
    p = q;
  }
  return p;
}

/// pi minus the mean angle between directions sampled `steps` parent steps
/// inside each region along the shared boundary. `forest` must hold the
/// pre-merge (tree) parents.
inline double edge_similarity(const DirectionField& field, const ParentForest& forest,
                              const RagEdge& e, int steps) {
  if (e.boundary.empty()) return kPi;
  double sum = 0.0;
  for (const auto& [p1, p2] : e.boundary) {
    const Vec2f& d1 = field[std::size_t(walk_parents(forest, p1, steps))];
    const Vec2f& d2 = field[std::size_t(walk_parents(forest, p2, steps))];
    sum += clamped_angle(dot(d1, d2));
  }
  return std::clamp(kPi - sum / double(e.boundary.size()), 0.0, kPi);
}

inline void score_edges(RegionGraph& graph, const DirectionField& field,
                        const ParentForest& forest, int steps) {
  for (auto& e : graph.edges) e.similarity = edge_similarity(field, forest, e, steps);
}

struct MergeEvent {
  enum class Phase { Attractive, Tiny };
  Phase phase = Phase::Attractive;
  std::int32_t a = 0;  // representatives at merge time
  std::int32_t b = 0;
  double similarity = 0.0;
};

/// Result of graph partitioning: a class id (a region id) for every region.
struct RegionPartition {
  std::vector<std::int32_t> klass;
  std::vector<MergeEvent> trace;
  std::vector<std::size_t> repulsive_edges;  // indices into graph.edges

  std::size_t class_count() const {
    std::vector<std::int32_t> k = klass;
    std::sort(k.begin(), k.end());
    return std::size_t(std::unique(k.begin(), k.end()) - k.begin());
  }
};

namespace detail {

// Union-find over regions that carries areas, members and the repulsion
// relation between current representatives. Members are kept as linked
// lists so a union splices in constant time.
class RegionUnion {
 public:
  explicit RegionUnion(const RegionGraph& g)
      : parent_(g.region_count()), area_(g.area), next_(g.region_count(), -1),
        tail_(g.region_count()), rep_(g.region_count()) {
    std::iota(parent_.begin(), parent_.end(), 0);
    std::iota(tail_.begin(), tail_.end(), 0);
  }

  std::int32_t find(std::int32_t x) {
    std::int32_t r = x;
    while (parent_[std::size_t(r)] != r) r = parent_[std::size_t(r)];
    while (parent_[std::size_t(x)] != r) {
      const std::int32_t next = parent_[std::size_t(x)];
      parent_[std::size_t(x)] = r;
      x = next;
    }
    return r;
  }

  std::int64_t area(std::int32_t rep) const { return area_[std::size_t(rep)]; }

  /// Calls fn(member) for every original region merged into `rep`.
  template <typename Fn>
  void for_each_member(std::int32_t rep, Fn&& fn) const {
    for (std::int32_t m = rep; m >= 0; m = next_[std::size_t(m)]) fn(m);
  }

  void add_repulsion(std::int32_t x, std::int32_t y) {
    x = find(x);
    y = find(y);
    if (x == y) return;
    insert(rep_[std::size_t(x)], y);
    insert(rep_[std::size_t(y)], x);
  }

  bool repulsive(std::int32_t x, std::int32_t y) const {
    const auto& r = rep_[std::size_t(x)];
    return std::find(r.begin(), r.end(), y) != r.end();
  }

  /// Merges two representatives; the larger area survives (ties: smaller id).
  std::int32_t unite(std::int32_t x, std::int32_t y) {
    if (area_[std::size_t(y)] > area_[std::size_t(x)] ||
        (area_[std::size_t(y)] == area_[std::size_t(x)] && y < x))
      std::swap(x, y);
    // y is absorbed into x
    parent_[std::size_t(y)] = x;
    area_[std::size_t(x)] += area_[std::size_t(y)];
    next_[std::size_t(tail_[std::size_t(x)])] = y;
    tail_[std::size_t(x)] = tail_[std::size_t(y)];
    std::vector<std::int32_t> ry = std::move(rep_[std::size_t(y)]);
    rep_[std::size_t(y)].clear();
    for (std::int32_t z : ry) {
      auto& rz = rep_[std::size_t(z)];
      rz.erase(std::find(rz.begin(), rz.end(), y));
      insert(rz, x);
      insert(rep_[std::size_t(x)], z);
    }
    return x;
  }

 private:
  static void insert(std::vector<std::int32_t>& set, std::int32_t v) {
    if (std::find(set.begin(), set.end(), v) == set.end()) set.push_back(v);
  }

  std::vector<std::int32_t> parent_;
  std::vector<std::int64_t> area_;
  std::vector<std::int32_t> next_;  // member lists, threaded through region ids
  std::vector<std::int32_t> tail_;
  std::vector<std::vector<std::int32_t>> rep_;  // small, unordered
};

}  // namespace detail

/// Size-adaptive merge threshold: theta_l when both areas are large.
inline double merge_threshold(std::int64_t area1, std::int64_t area2, const SegConfig& cfg) {
  return std::min(area1, area2) >= cfg.a_s ? cfg.theta_l : cfg.theta_s;
}

inline RegionPartition partition_graph(const RegionGraph& graph, const SegConfig& cfg) {
  cfg.validate();
  detail::RegionUnion uf(graph);
  RegionPartition out;

  std::vector<std::size_t> attractive;
  for (std::size_t i = 0; i < graph.edges.size(); ++i) {
    const RagEdge& e = graph.edges[i];
    if (e.similarity < cfg.s0) {
      uf.add_repulsion(e.a, e.b);
      out.repulsive_edges.push_back(i);
    } else {
      attractive.push_back(i);
    }
  }
  std::stable_sort(attractive.begin(), attractive.end(), [&](std::size_t x, std::size_t y) {
    const RagEdge& ex = graph.edges[x];
    const RagEdge& ey = graph.edges[y];
    if (ex.similarity != ey.similarity) return ex.similarity > ey.similarity;
    return std::pair(ex.root_a, ex.root_b) < std::pair(ey.root_a, ey.root_b);
  });

  for (std::size_t i : attractive) {
    const RagEdge& e = graph.edges[i];
    const std::int32_t ra = uf.find(e.a);
    const std::int32_t rb = uf.find(e.b);
    if (ra == rb) continue;
    if (!(e.similarity > merge_threshold(uf.area(ra), uf.area(rb), cfg))) continue;
    if (uf.repulsive(ra, rb)) continue;
    uf.unite(ra, rb);
    out.trace.push_back({MergeEvent::Phase::Attractive, ra, rb, e.similarity});
  }

  // Tiny regions join their most similar non-repulsive neighbor, smallest first.
  // Incident edge lists in CSR form, each in ascending edge order.
  std::vector<std::int32_t> inc_start(graph.region_count() + 1, 0);
  for (const RagEdge& e : graph.edges) {
    ++inc_start[std::size_t(e.a) + 1];
    ++inc_start[std::size_t(e.b) + 1];
  }
  for (std::size_t i = 0; i < graph.region_count(); ++i) inc_start[i + 1] += inc_start[i];
  std::vector<std::int32_t> incident(std::size_t(inc_start.back()));
  {
    std::vector<std::int32_t> fill(inc_start.begin(), inc_start.end() - 1);
    for (std::size_t i = 0; i < graph.edges.size(); ++i) {
      incident[std::size_t(fill[std::size_t(graph.edges[i].a)]++)] = std::int32_t(i);
      incident[std::size_t(fill[std::size_t(graph.edges[i].b)]++)] = std::int32_t(i);
    }
  }
  std::vector<std::int32_t> tiny;
  for (std::size_t i = 0; i < graph.region_count(); ++i) {
    const auto r = std::int32_t(i);
    if (uf.find(r) == r && uf.area(r) < cfg.a_t) tiny.push_back(r);
  }
  std::sort(tiny.begin(), tiny.end(), [&](std::int32_t x, std::int32_t y) {
    if (uf.area(x) != uf.area(y)) return uf.area(x) < uf.area(y);
    return x < y;
  });
  for (std::int32_t t0 : tiny) {
    const std::int32_t t = uf.find(t0);
    if (uf.area(t) >= cfg.a_t) continue;
    std::int32_t best = -1;
    double best_s = -1.0;
    PixelIndex best_root = 0;
    uf.for_each_member(t, [&](std::int32_t m) {
      for (std::int32_t k = inc_start[std::size_t(m)]; k < inc_start[std::size_t(m) + 1]; ++k) {
        const RagEdge& e = graph.edges[std::size_t(incident[std::size_t(k)])];
        const std::int32_t other = uf.find(e.a == m ? e.b : e.a);
        if (other == t || uf.repulsive(t, other)) continue;
        const PixelIndex root = graph.roots[std::size_t(other)];
        if (e.similarity > best_s || (e.similarity == best_s && root < best_root)) {
          best = other;
          best_s = e.similarity;
          best_root = root;
        }
      }
    });
    if (best < 0) continue;
    uf.unite(t, best);
    out.trace.push_back({MergeEvent::Phase::Tiny, t, best, best_s});
  }

  out.klass.resize(graph.region_count());
  for (std::size_t i = 0; i < graph.region_count(); ++i)
    out.klass[i] = uf.find(std::int32_t(i));
  return out;
}

/// Relabels to contiguous ids 0..K-1 in raster order of first occurrence.
inline LabelMap relabel_sequential(const LabelMap& in) {
  LabelMap out(in.width(), in.height());
  std::unordered_map<Label, Label> ids;
  for (std::size_t i = 0; i < in.size(); ++i) {
    auto [it, inserted] = ids.try_emplace(in[i], Label(ids.size()));
    out[i] = it->second;
  }
  return out;
}

/// Wall-clock milliseconds spent in each stage of segment().
struct StageTimings {
  double forest_ms = 0.0;
  double merge_roots_ms = 0.0;
  double rag_ms = 0.0;
  double similarity_ms = 0.0;
  double partition_ms = 0.0;
  double relabel_ms = 0.0;

  double total_ms() const {
    return forest_ms + merge_roots_ms + rag_ms + similarity_ms + partition_ms + relabel_ms;
  }
};

/// Intermediate products of a segmentation run, kept for inspection.
struct SegmentationTrace {
  ParentForest forest;
  ParentForest merged;
  RegionGraph graph;
  RegionPartition partition;
};

inline LabelMap segment(const DirectionField& field, const PartitionConfig& cfg_part,
                        const SegConfig& cfg_seg, StageTimings* timings = nullptr,
                        SegmentationTrace* trace = nullptr) {
  cfg_part.validate();
  cfg_seg.validate();
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  StageTimings t;

  auto t0 = clock::now();
  ParentForest forest = build_forest(field, cfg_part);
  t.forest_ms = ms_since(t0);

  t0 = clock::now();
  ParentForest merged = merge_nearby_roots(forest);
  LabelMap initial = flatten(merged);
  t.merge_roots_ms = ms_since(t0);

  t0 = clock::now();
  RegionGraph graph = build_rag(initial, merged);
  t.rag_ms = ms_since(t0);

  t0 = clock::now();
  score_edges(graph, field, forest, cfg_seg.steps);
  t.similarity_ms = ms_since(t0);

  t0 = clock::now();
  RegionPartition part = partition_graph(graph, cfg_seg);
  t.partition_ms = ms_since(t0);

  t0 = clock::now();
  for (std::size_t i = 0; i < initial.size(); ++i)
    initial[i] = Label(part.klass[initial[i]]);
  LabelMap out = relabel_sequential(initial);
  t.relabel_ms = ms_since(t0);

  if (timings) *timings = t;
  if (trace) *trace = {std::move(forest), std::move(merged), std::move(graph), std::move(part)};
  return out;
}

}  // namespace superbpd
