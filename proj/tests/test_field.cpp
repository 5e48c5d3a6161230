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
#include <random>

#include "oracles.hpp"
#include "superbpd/superbpd.hpp"

using namespace superbpd;

namespace {

LabelMap make(int w, int h, std::vector<Label> v) {
  LabelMap m(w, h);
  for (std::size_t i = 0; i < v.size(); ++i) m[i] = v[i];
  return m;
}

template <typename Fn>
ErrorKind error_kind(Fn fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST(BoundarySites, HorizontalBoundary) {
  const auto s = boundary_sites(make(2, 2, {0, 0, 1, 1}));
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.sites[0].row(), 0.5);
  EXPECT_DOUBLE_EQ(s.sites[0].col(), 0.0);
  EXPECT_DOUBLE_EQ(s.sites[1].row(), 0.5);
  EXPECT_DOUBLE_EQ(s.sites[1].col(), 1.0);
}

TEST(BoundarySites, SingleLabelIsEmpty) {
  EXPECT_TRUE(boundary_sites(LabelMap(4, 4)).empty());
}

TEST(BoundarySites, CenterPixelHasFourSites) {
  LabelMap m(3, 3);
  m(1, 1) = 7;
  const auto s = boundary_sites(m);
  ASSERT_EQ(s.size(), 4u);
  // row-major by midpoint: above, left, right, below
  EXPECT_EQ(s.sites[0], (BoundarySite{1, 2}));
  EXPECT_EQ(s.sites[1], (BoundarySite{2, 1}));
  EXPECT_EQ(s.sites[2], (BoundarySite{2, 3}));
  EXPECT_EQ(s.sites[3], (BoundarySite{3, 2}));
}

TEST(BoundarySites, MatchesOracleOrder) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const LabelMap m = oracle::random_labels(17, 13, 4, seed);
    const auto got = boundary_sites(m);
    const auto want = oracle::sites(m);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < want.size(); ++k) {
      EXPECT_EQ(got.sites[k].row2, want[k].row2);
      EXPECT_EQ(got.sites[k].col2, want[k].col2);
    }
  }
}

TEST(NearestSite, SingleSite) {
  BoundarySiteSet s{1, 2, {{1, 0}}};
  const auto nm = nearest_site_transform(s, 1, 2);
  EXPECT_EQ(nm.site[0], 0);
  EXPECT_DOUBLE_EQ(nm.distance(0), 0.5);
  EXPECT_DOUBLE_EQ(nm.distance(1), 0.5);
}

TEST(NearestSite, EquidistantSitesPickEarlierIndex) {
  // Pixel (0,1) of a 1x3 raster is 0.5 from both (0,0.5) and (0,1.5).
  BoundarySiteSet s{3, 1, {{0, 1}, {0, 3}}};
  const auto nm = nearest_site_transform(s, 3, 1, 1, true);
  EXPECT_EQ(nm.site[1], 0);
  ASSERT_EQ(nm.nearest_sites(1).size(), 2u);
  EXPECT_EQ(nm.nearest_sites(1)[0], 0);
  EXPECT_EQ(nm.nearest_sites(1)[1], 1);
}

TEST(NearestSite, EmptySetIsAnError) {
  try {
    nearest_site_transform(BoundarySiteSet{4, 4, {}}, 4, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoBoundary);
    EXPECT_STREQ(e.what(), "no boundary");
  }
}

TEST(NearestSite, MatchesBruteForceWithTies) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> dim(2, 40);
  std::uniform_int_distribution<int> labels(2, 6);
  for (int trial = 0; trial < 40; ++trial) {
    const int w = dim(rng), h = dim(rng);
    const LabelMap m = oracle::random_labels(w, h, labels(rng), rng(), trial % 3);
    const auto sites = boundary_sites(m);
    if (sites.empty()) continue;
    const auto got = nearest_site_transform(sites, w, h, 1 + trial % 3, true);
    const auto want = oracle::nearest_sites(oracle::sites(m), w, h);
    for (std::size_t i = 0; i < want.size(); ++i) {
      ASSERT_EQ(got.dist2_x4[i], want[i].dist2_x4) << "trial " << trial << " pixel " << i;
      ASSERT_EQ(got.site[i], want[i].site) << "trial " << trial << " pixel " << i;
      const auto ties = got.nearest_sites(i);
      ASSERT_EQ(std::vector<int>(ties.begin(), ties.end()), want[i].all);
    }
  }
}

TEST(NearestSite, SparseSitesOnLargeRaster) {
  // Few sites far apart: long parabola envelopes with many exact ties.
  LabelMap m(61, 47);
  m(10, 10) = 1;
  m(30, 50) = 2;
  m(46, 0) = 3;
  const auto got = nearest_site_transform(boundary_sites(m), 61, 47, 1, true);
  const auto want = oracle::nearest_sites(oracle::sites(m), 61, 47);
  for (std::size_t i = 0; i < want.size(); ++i) {
    ASSERT_EQ(got.dist2_x4[i], want[i].dist2_x4);
    ASSERT_EQ(got.site[i], want[i].site);
    const auto ties = got.nearest_sites(i);
    ASSERT_EQ(std::vector<int>(ties.begin(), ties.end()), want[i].all);
  }
}

TEST(NearestSite, ThreadCountDoesNotChangeResult) {
  const LabelMap m = synth::voronoi(97, 71, 9, 3);
  const auto s = boundary_sites(m);
  const auto a = nearest_site_transform(s, 97, 71, 1, true);
  const auto b = nearest_site_transform(s, 97, 71, 4, true);
  EXPECT_EQ(a.site, b.site);
  EXPECT_EQ(a.dist2_x4, b.dist2_x4);
  EXPECT_EQ(a.tie_start, b.tie_start);
  EXPECT_EQ(a.tie_sites, b.tie_sites);
}

TEST(NearestSite, DistanceAtLeastHalfPixel) {
  const LabelMap m = oracle::random_labels(30, 30, 5, 11);
  const auto nm = nearest_site_transform(boundary_sites(m), 30, 30);
  for (std::size_t i = 0; i < nm.size(); ++i) EXPECT_GE(nm.distance(i), 0.5);
}

TEST(GtField, ParallelBoundary) {
  const DirectionField f = gt_field(make(4, 2, {0, 0, 0, 0, 1, 1, 1, 1}));
  for (int c = 0; c < 4; ++c) {
    EXPECT_EQ(f(0, c).dr, -1.0f);
    EXPECT_EQ(f(0, c).dc, 0.0f);
    EXPECT_EQ(f(1, c).dr, 1.0f);
    EXPECT_EQ(f(1, c).dc, 0.0f);
  }
}

TEST(GtField, SingleLabelIsDegenerate) {
  try {
    gt_field(LabelMap(5, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Degenerate);
    EXPECT_STREQ(e.what(), "degenerate segmentation");
  }
}

TEST(GtField, UnitNormEverywhere) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const DirectionField f = gt_field(oracle::random_labels(40, 33, 5, seed, 2));
    EXPECT_LE(f.max_norm_error(), 1e-4);
  }
}

TEST(GtField, DiscIsRadial) {
  const double cr = 64.0, cc = 64.0, radius = 40.0;
  const LabelMap m = synth::disc(128, 128, cr, cc, radius);
  const DirectionField f = gt_field(m);
  double sum = 0.0;
  int n = 0;
  for (int r = 0; r < 128; ++r)
    for (int c = 0; c < 128; ++c) {
      const double dr = r - cr, dc = c - cc;
      const double rho = std::hypot(dr, dc);
      if (rho < 4.0) continue;  // directions are ill-defined at the centre
      const double sign = m(r, c) == 1 ? -1.0 : 1.0;  // inward inside, outward outside
      const Vec2f want{float(sign * dr / rho), float(sign * dc / rho)};
      sum += rad_to_deg(clamped_angle(dot(f(r, c), want)));
      ++n;
    }
  EXPECT_LT(sum / n, 5.0);
}

TEST(GtField, DiagonalPinchStaysInsideLabel) {
  // Label 0 passes between two diagonal label-1 pixels; the tied sites around
  // the centre cancel and no single site points inside label 0.
  const LabelMap m = make(3, 3, {1, 0, 0,
                                 0, 0, 0,
                                 0, 0, 1});
  const Vec2f v = gt_field(m)(1, 1);
  const auto& off = kNeighbors8[std::size_t(pointed_neighbor(v))];
  EXPECT_EQ(m(1 + off.dr, 1 + off.dc), 0);
}

TEST(GtField, PointsInsideLabelUnlessIsolated) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const LabelMap m = oracle::random_labels(30, 27, 2 + int(seed % 4), seed, int(seed % 3));
    if (boundary_sites(m).empty()) continue;
    const DirectionField f = gt_field(m);
    for (int r = 0; r < m.height(); ++r)
      for (int c = 0; c < m.width(); ++c) {
        bool has_mate = false;
        for (const auto& o : kNeighbors8)
          has_mate |= m.contains(r + o.dr, c + o.dc) && m(r + o.dr, c + o.dc) == m(r, c);
        if (!has_mate) continue;
        const auto& off = kNeighbors8[std::size_t(pointed_neighbor(f(r, c)))];
        const int rr = r + off.dr, cc = c + off.dc;
        if (m.contains(rr, cc)) {
          ASSERT_EQ(m(rr, cc), m(r, c)) << "seed " << seed << " " << r << "," << c;
        }
      }
  }
}

TEST(GtField, StraightBoundaryPairsDiverge) {
  const DirectionField f = gt_field(synth::vertical_halves(20, 9));
  for (int r = 0; r < 9; ++r) EXPECT_GT(rad_to_deg(clamped_angle(dot(f(r, 9), f(r, 10)))), 90.0);
}

TEST(GtField, PairsSharingTheirNearestSiteDiverge) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const LabelMap m = synth::voronoi(48, 40, 6, seed);
    const auto sites = boundary_sites(m);
    const auto nm = nearest_site_transform(sites, m.width(), m.height(), 1, true);
    const DirectionField f = gt_field(m);
    int checked = 0;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const auto& s = sites.sites[k];
      // the two pixels this site separates
      const int r1 = s.row2 / 2, c1 = s.col2 / 2;
      const int r2 = (s.row2 + 1) / 2, c2 = (s.col2 + 1) / 2;
      const auto p = std::size_t(m.index(r1, c1)), q = std::size_t(m.index(r2, c2));
      if (nm.site[p] != int(k) || nm.site[q] != int(k)) continue;
      ++checked;
      // A unique shared nearest site gives exactly antipodal vectors. At
      // staircase corners a pixel is equidistant from several sites and takes
      // their bisector, which can be orthogonal to its neighbor but never
      // points toward it.
      const bool unique = nm.nearest_sites(p).size() == 1 && nm.nearest_sites(q).size() == 1;
      if (unique)
        EXPECT_LT(dot(f[p], f[q]), 0.0) << "seed " << seed << " site " << k;
      else
        EXPECT_LE(dot(f[p], f[q]), 1e-6) << "seed " << seed << " site " << k;
    }
    EXPECT_GT(checked, 0);
  }
}

TEST(GtField, ThreadCountDoesNotChangeResult) {
  const LabelMap m = synth::voronoi(90, 64, 7, 9);
  EXPECT_EQ(gt_field(m, 1), gt_field(m, 3));
}

TEST(Perturb, ZeroSigmaIsIdentity) {
  const DirectionField f = gt_field(synth::voronoi(32, 32, 4, 1));
  EXPECT_EQ(perturb(f, 0.0, 123), f);
}

TEST(Perturb, Deterministic) {
  const DirectionField f = gt_field(synth::voronoi(32, 32, 4, 1));
  EXPECT_EQ(perturb(f, 10.0, 99), perturb(f, 10.0, 99));
  EXPECT_FALSE(perturb(f, 10.0, 99) == perturb(f, 10.0, 100));
}

TEST(Perturb, HalfNormalRotationStatistics) {
  const DirectionField f = oracle::random_unit_field(256, 256, 4);
  const DirectionField g = perturb(f, 10.0, 2024);
  double sum = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) sum += std::abs(rad_to_deg(signed_angle(f[i], g[i])));
  const double n = double(f.size());
  const double mean = sum / n;
  const double expected = std::sqrt(2.0 / kPi) * 10.0;
  const double stderr_mean = 10.0 * std::sqrt(1.0 - 2.0 / kPi) / std::sqrt(n);
  EXPECT_NEAR(mean, expected, 3.0 * stderr_mean);
  EXPECT_LE(g.max_norm_error(), 1e-6);
}

TEST(Perturb, MaskRestrictsNoise) {
  const DirectionField f = gt_field(synth::vertical_halves(16, 16));
  std::vector<std::uint8_t> mask(f.size(), 0);
  for (int c = 0; c < 16; ++c) mask[std::size_t(f.index(3, c))] = 1;
  const DirectionField g = perturb(f, 20.0, 5, mask);
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask[i]) continue;
    EXPECT_EQ(f[i].dr, g[i].dr);
    EXPECT_EQ(f[i].dc, g[i].dc);
  }
  EXPECT_FALSE(f == g);
}

TEST(Perturb, NegativeSigmaRejected) {
  const DirectionField f(4, 4);
  EXPECT_EQ(error_kind([&] { perturb(f, -1.0, 0); }), ErrorKind::InvalidArgument);
}

TEST(Discrepancy, IdenticalFieldsGiveZero) {
  const LabelMap m = synth::voronoi(40, 30, 5, 2);
  const DirectionField f = gt_field(m);
  const auto d = field_discrepancy(f, f, m);
  EXPECT_EQ(d.total, 0.0);
  EXPECT_EQ(d.l2_term, 0.0);
  EXPECT_EQ(d.angle_term, 0.0);
}

TEST(Discrepancy, TwoFlippedPixels) {
  const LabelMap m(8, 8);  // one region of 64 pixels, w = 1/8
  const DirectionField f(8, 8, Vec2f{0.6f, 0.8f});
  DirectionField g = f;
  g[5] = {-0.6f, -0.8f};
  g[40] = {-0.6f, -0.8f};
  const auto d = field_discrepancy(f, g, m, 1.0);
  const double w = 1.0 / 8.0;
  EXPECT_NEAR(d.l2_term, 2 * w * 4.0, 1e-6 * 2 * w * 4.0);
  EXPECT_NEAR(d.angle_term, 2 * w * kPi * kPi, 1e-6 * 2 * w * kPi * kPi);
  EXPECT_NEAR(d.total, 2 * w * (4.0 + kPi * kPi), 1e-6 * 2 * w * (4.0 + kPi * kPi));
}

TEST(Discrepancy, MatchesScalarLoop) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const LabelMap m = oracle::random_labels(32, 32, 4, seed, 2);
    const DirectionField f = gt_field(m);
    const DirectionField g = oracle::random_unit_field(32, 32, seed + 100);
    const double alpha = 0.5 + double(seed);
    const auto d = field_discrepancy(f, g, m, alpha);
    const auto [l2, ang] = oracle::discrepancy_terms(f, g, m);
    EXPECT_NEAR(d.l2_term, l2, 1e-6 * l2);
    EXPECT_NEAR(d.angle_term, ang, 1e-6 * ang);
    EXPECT_NEAR(d.total, d.l2_term + alpha * d.angle_term, 1e-6 * d.total);
    EXPECT_GE(d.total, 0.0);
  }
}

TEST(Discrepancy, ShapeMismatch) {
  const DirectionField f(4, 4), g(4, 5);
  EXPECT_EQ(error_kind([&] { field_discrepancy(f, g, LabelMap(4, 4)); }),
            ErrorKind::DimensionMismatch);
}
