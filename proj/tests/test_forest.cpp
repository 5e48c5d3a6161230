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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "superbpd/superbpd.hpp"

using namespace superbpd;

namespace {

constexpr float kHalfSqrt2 = 0.70710678f;

// Root reached from every pixel by walking at most N steps; -1 if none.
std::vector<PixelIndex> walk_to_roots(const ParentForest& f) {
  std::vector<PixelIndex> out(f.size(), -1);
  for (std::size_t i = 0; i < f.size(); ++i) {
    PixelIndex p = PixelIndex(i);
    for (std::size_t step = 0; step <= f.size(); ++step) {
      if (f.parent[std::size_t(p)] == p) {
        out[i] = p;
        break;
      }
      p = f.parent[std::size_t(p)];
    }
  }
  return out;
}

}  // namespace

TEST(NextPixel, East) {
  const DirectionField f(5, 5, Vec2f{0.0f, 1.0f});
  EXPECT_EQ(next_pixel(f, f.index(2, 2)), f.index(2, 3));
}

TEST(NextPixel, NorthEast) {
  const DirectionField f(5, 5, Vec2f{-kHalfSqrt2, kHalfSqrt2});
  EXPECT_EQ(next_pixel(f, f.index(2, 2)), f.index(1, 3));
}

TEST(NextPixel, OffRaster) {
  const DirectionField f(5, 5, Vec2f{-1.0f, 0.0f});
  EXPECT_FALSE(next_pixel(f, f.index(0, 2)).has_value());
}

TEST(NextPixel, ExactTieKeepsScanOrder) {
  // The zero vector ties all eight neighbors; N comes first in scan order.
  EXPECT_EQ(pointed_neighbor(Vec2f{0.0f, 0.0f}), 0);
  // (1, 0) vs. offsets S and the two southern diagonals: S strictly wins.
  EXPECT_EQ(pointed_neighbor(Vec2f{1.0f, 0.0f}), 4);
  for (int n = 0; n < 8; ++n) {
    const Vec2f u{float(kNeighbors8[n].ur), float(kNeighbors8[n].uc)};
    EXPECT_EQ(pointed_neighbor(u), n);
  }
}

TEST(BuildForest, UniformEast) {
  const DirectionField f(6, 4, Vec2f{0.0f, 1.0f});
  const ParentForest forest = build_forest(f);
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 5; ++c) EXPECT_EQ(forest.parent[f.index(r, c)], f.index(r, c + 1));
    EXPECT_TRUE(forest.is_root(f.index(r, 5)));
  }
  EXPECT_EQ(forest.roots, (std::vector<PixelIndex>{5, 11, 17, 23}));
}

TEST(BuildForest, FacingPixelsAreRoots) {
  DirectionField f(2, 1);
  f[0] = {0.0f, 1.0f};
  f[1] = {0.0f, -1.0f};
  const ParentForest forest = build_forest(f);
  EXPECT_EQ(forest.roots, (std::vector<PixelIndex>{0, 1}));
}

TEST(BuildForest, ThresholdIsStrictAwayFromRounding) {
  // 50 degrees apart: grouped at theta_a = 51, not at 49.
  DirectionField f(2, 1);
  f[0] = {0.0f, 1.0f};
  const double a = deg_to_rad(50.0);
  f[1] = {float(std::sin(a)), float(std::cos(a))};
  EXPECT_TRUE(build_forest(f, {51.0}).is_root(1));
  EXPECT_EQ(build_forest(f, {51.0}).parent[0], 1);
  EXPECT_EQ(build_forest(f, {49.0}).parent[0], 0);
}

TEST(BuildForest, ExactFortyFiveDegreesGroups) {
  // An axis vector next to a diagonal vector is exactly 45 degrees apart in
  // real arithmetic; float rounding must not split them.
  DirectionField f(2, 1);
  f[0] = {0.0f, 1.0f};
  f[1] = {kHalfSqrt2, kHalfSqrt2};
  EXPECT_EQ(build_forest(f).parent[0], 1);
}

TEST(BuildForest, CyclesAreBrokenAtSmallestIndex) {
  // 2x2 rotational loop: (0,0)->E, (0,1)->S, (1,1)->W, (1,0)->N, each step 90
  // degrees, grouped once theta_a exceeds 90.
  DirectionField f(2, 2);
  f(0, 0) = {0.0f, 1.0f};
  f(0, 1) = {1.0f, 0.0f};
  f(1, 1) = {0.0f, -1.0f};
  f(1, 0) = {-1.0f, 0.0f};
  const ParentForest forest = build_forest(f, {100.0});
  EXPECT_EQ(forest.roots, (std::vector<PixelIndex>{0}));
  EXPECT_EQ(forest.parent[0], 0);
  EXPECT_EQ(forest.parent[1], 3);
  EXPECT_EQ(forest.parent[3], 2);
  EXPECT_EQ(forest.parent[2], 0);
}

TEST(BuildForest, InvalidThreshold) {
  const DirectionField f(3, 3);
  EXPECT_THROW(build_forest(f, {0.0}), Error);
  EXPECT_THROW(build_forest(f, {180.0}), Error);
}

TEST(BuildForest, InvariantsOnRandomFields) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const DirectionField f = oracle::random_unit_field(32, 32, seed);
    const ParentForest forest = build_forest(f, {seed % 2 ? 45.0 : 120.0});
    const auto roots = walk_to_roots(forest);
    std::set<PixelIndex> self;
    for (std::size_t i = 0; i < forest.size(); ++i) {
      ASSERT_GE(roots[i], 0) << "seed " << seed;
      if (forest.parent[i] == PixelIndex(i)) self.insert(PixelIndex(i));
    }
    EXPECT_EQ(std::vector<PixelIndex>(self.begin(), self.end()), forest.roots);
  }
}

TEST(BuildForest, ParentsAreNeighbors) {
  const DirectionField f = oracle::random_unit_field(20, 20, 3);
  const ParentForest forest = build_forest(f);
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Pixel a = f.pixel(PixelIndex(i));
    const Pixel b = f.pixel(forest.parent[i]);
    EXPECT_LE(std::abs(a.row - b.row), 1);
    EXPECT_LE(std::abs(a.col - b.col), 1);
  }
}

TEST(BuildForest, Deterministic) {
  const DirectionField f = oracle::random_unit_field(40, 40, 8);
  EXPECT_EQ(build_forest(f), build_forest(f));
}

TEST(BuildForest, GtFieldTreesArePure) {
  // A pixel with no same-label 8-neighbor must link into another label or be
  // a root, depending only on its neighbors' directions; every other pixel
  // must stay inside its label.
  const auto isolated = [](const LabelMap& m, int r, int c) {
    for (const auto& off : kNeighbors8)
      if (m.contains(r + off.dr, c + off.dc) && m(r + off.dr, c + off.dc) == m(r, c)) return false;
    return true;
  };
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const LabelMap m = seed % 2 ? synth::voronoi(64, 48, 3 + int(seed % 6), seed)
                                : oracle::random_labels(40, 36, 2 + int(seed % 5), seed, 1 + int(seed % 3));
    const ParentForest forest = build_forest(gt_field(m));
    for (int r = 0; r < m.height(); ++r)
      for (int c = 0; c < m.width(); ++c) {
        const std::size_t i = std::size_t(m.index(r, c));
        if (isolated(m, r, c)) continue;
        ASSERT_EQ(m[i], m[std::size_t(forest.parent[i])]) << "seed " << seed << " pixel " << i;
      }
  }
}

TEST(BuildForest, TwoRectangles) {
  LabelMap m(30, 20);
  for (int r = 0; r < 20; ++r)
    for (int c = 12; c < 30; ++c) m(r, c) = 1;
  const ParentForest forest = build_forest(gt_field(m));
  EXPECT_GE(forest.roots.size(), 2u);
  const LabelMap trees = flatten(forest);
  std::map<Label, Label> owner;
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto [it, fresh] = owner.emplace(trees[i], m[i]);
    EXPECT_EQ(it->second, m[i]);
  }
}

TEST(Flatten, SingleChain) {
  const DirectionField f(5, 1, Vec2f{0.0f, 1.0f});
  const LabelMap l = flatten(build_forest(f));
  EXPECT_EQ(count_labels(l), 1u);
}

TEST(Flatten, UniformEastRows) {
  const DirectionField f(4, 4, Vec2f{0.0f, 1.0f});
  const LabelMap l = flatten(build_forest(f));
  EXPECT_EQ(count_labels(l), 4u);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(l(r, c), Label(r));
}

TEST(Flatten, IdempotentAndCompressed) {
  const DirectionField f = oracle::random_unit_field(25, 25, 12);
  const ParentForest forest = build_forest(f);
  const ParentForest flat = compress(forest);
  EXPECT_EQ(flatten(forest), flatten(flat));
  EXPECT_EQ(flatten(flat), flatten(compress(flat)));
  for (std::size_t i = 0; i < flat.size(); ++i) EXPECT_TRUE(flat.is_root(flat.parent[i]));
  EXPECT_EQ(count_labels(flatten(forest)), forest.roots.size());
}
