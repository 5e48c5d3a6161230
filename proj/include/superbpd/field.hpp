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
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <thread>
#include <unordered_map>
#include <vector>

#include "superbpd/core.hpp"

// Boundary-to-pixel direction fields.
//
// Region boundaries are represented by inter-pixel sites: one site at the
// midpoint of every 4-adjacent pixel pair whose labels differ. Internally all
// site arithmetic runs on a doubled integer grid where pixel (r, c) sits at
// (2r, 2c) and a site sits at (2r+1, 2c) or (2r, 2c+1), so distances and tie
// comparisons are exact.

namespace superbpd {

struct BoundarySite {
  int row2 = 0;  // doubled row coordinate
  int col2 = 0;  // doubled column coordinate

  double row() const noexcept { return row2 * 0.5; }
  double col() const noexcept { return col2 * 0.5; }
  friend bool operator==(const BoundarySite&, const BoundarySite&) = default;
};

/// Boundary sites of a label map, sorted row-major by midpoint.
struct BoundarySiteSet {
  int width = 0;
  int height = 0;
  std::vector<BoundarySite> sites;

  bool empty() const noexcept { return sites.empty(); }
  std::size_t size() const noexcept { return sites.size(); }
};

inline BoundarySiteSet boundary_sites(const LabelMap& gt) {
  BoundarySiteSet out{gt.width(), gt.height(), {}};
  const int h = gt.height();
  const int w = gt.width();
  // Doubled row 2r holds vertical-boundary sites of row r; doubled row 2r+1
  // holds horizontal-boundary sites between rows r and r+1.
  for (int r = 0; r < h; ++r) {
    for (int c = 0; c + 1 < w; ++c)
      if (gt(r, c) != gt(r, c + 1)) out.sites.push_back({2 * r, 2 * c + 1});
    if (r + 1 < h)
      for (int c = 0; c < w; ++c)
        if (gt(r, c) != gt(r + 1, c)) out.sites.push_back({2 * r + 1, 2 * c});
  }
  return out;
}

/// Per-pixel nearest boundary site. Squared distances are kept on the doubled
/// grid (4x the true squared distance), which makes them exact integers.
///
/// `site` holds the smallest-index nearest site. When ties are collected, the
/// full set of equidistant nearest sites of pixel i is
/// tie_sites[tie_start[i] .. tie_start[i+1]), in ascending index order.
struct NearestSiteMap : RasterShape {
  std::vector<std::int32_t> site;
  std::vector<std::int64_t> dist2_x4;
  std::vector<std::int32_t> tie_start;
  std::vector<std::int32_t> tie_sites;

  NearestSiteMap() = default;
  NearestSiteMap(int width, int height)
      : RasterShape(width, height), site(size(), -1), dist2_x4(size(), 0) {}

  double squared_distance(std::size_t i) const { return double(dist2_x4[i]) / 4.0; }
  double distance(std::size_t i) const { return std::sqrt(double(dist2_x4[i])) / 2.0; }

  bool has_ties() const noexcept { return !tie_start.empty(); }
  std::span<const std::int32_t> nearest_sites(std::size_t i) const {
    return {tie_sites.data() + tie_start[i], std::size_t(tie_start[i + 1] - tie_start[i])};
  }
};

namespace detail {

// Rational number num/den (den > 0), or +-infinity.
struct Breakpoint {
  std::int64_t num = 0;
  std::int64_t den = 1;
  int inf = 0;
};

inline bool less(const Breakpoint& a, const Breakpoint& b) {
  if (a.inf != 0 || b.inf != 0) {
    if (a.inf == b.inf) return false;
    return a.inf < b.inf;
  }
  return __int128(a.num) * b.den < __int128(b.num) * a.den;
}

inline bool less_than_int(const Breakpoint& a, std::int64_t x) {
  if (a.inf != 0) return a.inf < 0;
  return a.num < x * a.den;
}

inline bool equals_int(const Breakpoint& a, std::int64_t x) {
  return a.inf == 0 && a.num == x * a.den;
}

template <typename Fn>
void parallel_for(int count, int threads, Fn&& fn) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(threads));
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace detail

/// Exact Euclidean nearest-site transform (separable lower-envelope method).
///
/// Column pass: for every doubled-grid column, the nearest site row for each
/// pixel row. Row pass: lower envelope of the parabolas g_C + (x - C)^2 over
/// columns. Breakpoints are exact rationals and an envelope entry is popped
/// only when it is strictly dominated everywhere, so every site that attains
/// the minimum at a query column survives; equal candidates are resolved by the
/// smallest (row2, col2), i.e. the smallest site index. With `collect_ties`
/// every equidistant nearest site is recorded as well.
inline NearestSiteMap nearest_site_transform(const BoundarySiteSet& sites,
                                             int width, int height,
                                             int threads = 1,
                                             bool collect_ties = false) {
  if (sites.empty()) throw Error(ErrorKind::NoBoundary, "no boundary");
  NearestSiteMap out(width, height);

  const int rows2 = 2 * height - 1;
  const int cols2 = 2 * width - 1;
  std::vector<std::int32_t> site_at(std::size_t(rows2) * std::size_t(cols2), -1);
  for (std::size_t i = 0; i < sites.sites.size(); ++i) {
    const auto& s = sites.sites[i];
    if (s.row2 < 0 || s.col2 < 0 || s.row2 >= rows2 || s.col2 >= cols2)
      throw Error(ErrorKind::InvalidArgument, "boundary site outside raster");
    site_at[std::size_t(s.row2) * cols2 + s.col2] = std::int32_t(i);
  }

  constexpr std::int64_t kNone = std::numeric_limits<std::int64_t>::max();
  // col_best[r * cols2 + C]: squared row offset to the nearest site in column C
  // as seen from pixel row r, and that site's doubled row.
  std::vector<std::int64_t> col_d2(std::size_t(height) * cols2, kNone);
  std::vector<std::int32_t> col_row(std::size_t(height) * cols2, -1);
  std::vector<std::int32_t> col_tie_row(std::size_t(height) * cols2, -1);

  detail::parallel_for(cols2, threads, [&](int c2) {
    std::vector<int> above(std::size_t(height), -1), below(std::size_t(height), -1);
    int last = -1;
    for (int r2 = 0, r = 0; r2 < rows2; ++r2) {
      if (site_at[std::size_t(r2) * cols2 + c2] >= 0) last = r2;
      if ((r2 & 1) == 0) above[std::size_t(r++)] = last;
    }
    int next = -1;
    for (int r2 = rows2 - 1; r2 >= 0; --r2) {
      if (site_at[std::size_t(r2) * cols2 + c2] >= 0) next = r2;
      if ((r2 & 1) == 0) below[std::size_t(r2 / 2)] = next;
    }
    for (int r = 0; r < height; ++r) {
      const int q = 2 * r;
      const std::int64_t da = above[r] >= 0 ? q - above[r] : kNone;
      const std::int64_t db = below[r] >= 0 ? below[r] - q : kNone;
      const std::size_t k = std::size_t(r) * cols2 + c2;
      if (da == kNone && db == kNone) continue;
      // Ties go to the upper site (smaller row2, hence smaller index).
      if (da <= db) {
        col_d2[k] = da * da;
        col_row[k] = above[r];
        if (da == db && above[r] != below[r]) col_tie_row[k] = below[r];
      } else {
        col_d2[k] = db * db;
        col_row[k] = below[r];
      }
    }
  });

  std::vector<std::vector<std::int32_t>> row_ties(collect_ties ? std::size_t(height) : 0);
  std::vector<std::vector<std::int32_t>> row_tie_count(collect_ties ? std::size_t(height) : 0);

  detail::parallel_for(height, threads, [&](int r) {
    const std::int64_t* g = &col_d2[std::size_t(r) * cols2];
    const std::int32_t* grow = &col_row[std::size_t(r) * cols2];
    const std::int32_t* gtie = &col_tie_row[std::size_t(r) * cols2];
    std::vector<int> env;
    std::vector<detail::Breakpoint> z;
    env.reserve(std::size_t(cols2));
    z.reserve(std::size_t(cols2) + 1);

    auto intersect = [&](int q, int v) {
      // g_q + (x-q)^2 == g_v + (x-v)^2  with q > v
      const std::int64_t num = (g[q] + std::int64_t(q) * q) - (g[v] + std::int64_t(v) * v);
      return detail::Breakpoint{num, 2 * std::int64_t(q - v), 0};
    };

    for (int c2 = 0; c2 < cols2; ++c2) {
      if (g[c2] == kNone) continue;
      if (env.empty()) {
        env.push_back(c2);
        z.push_back({0, 1, -1});
        z.push_back({0, 1, +1});
        continue;
      }
      detail::Breakpoint s = intersect(c2, env.back());
      while (detail::less(s, z[env.size() - 1])) {
        env.pop_back();
        z.pop_back();
        s = intersect(c2, env.back());
      }
      z.back() = s;
      env.push_back(c2);
      z.push_back({0, 1, +1});
    }

    std::size_t k = 0;
    for (int c = 0; c < width; ++c) {
      const std::int64_t x = 2 * c;
      while (detail::less_than_int(z[k + 1], x)) ++k;
      std::size_t last = k + 1;
      while (last < env.size() && detail::equals_int(z[last], x)) ++last;
      std::int64_t best_d = kNone;
      std::int32_t best_site = -1;
      std::int64_t best_r2 = 0, best_c2 = 0;
      for (std::size_t i = k; i < last; ++i) {
        const int c2 = env[i];
        const std::int64_t d = g[c2] + (x - c2) * (x - c2);
        const std::int64_t r2 = grow[c2];
        if (d < best_d || (d == best_d && (r2 < best_r2 || (r2 == best_r2 && c2 < best_c2)))) {
          best_d = d;
          best_r2 = r2;
          best_c2 = c2;
          best_site = site_at[std::size_t(r2) * cols2 + c2];
        }
      }
      const std::size_t p = std::size_t(r) * width + c;
      out.site[p] = best_site;
      out.dist2_x4[p] = best_d;
      if (collect_ties) {
        auto& ties = row_ties[std::size_t(r)];
        const std::size_t first = ties.size();
        for (std::size_t i = k; i < last; ++i) {
          const int c2 = env[i];
          if (g[c2] + (x - c2) * (x - c2) != best_d) continue;
          ties.push_back(site_at[std::size_t(grow[c2]) * cols2 + c2]);
          if (gtie[c2] >= 0) ties.push_back(site_at[std::size_t(gtie[c2]) * cols2 + c2]);
        }
        std::sort(ties.begin() + std::ptrdiff_t(first), ties.end());
        row_tie_count[std::size_t(r)].push_back(std::int32_t(ties.size() - first));
      }
    }
  });

  if (collect_ties) {
    out.tie_start.assign(out.size() + 1, 0);
    std::size_t p = 0;
    for (int r = 0; r < height; ++r) {
      for (std::int32_t n : row_tie_count[std::size_t(r)]) {
        out.tie_start[p + 1] = out.tie_start[p] + n;
        ++p;
      }
      out.tie_sites.insert(out.tie_sites.end(), row_ties[std::size_t(r)].begin(),
                           row_ties[std::size_t(r)].end());
    }
  }
  return out;
}

/// Unit vector from the nearest boundary site toward each pixel center.
///
/// A pixel equidistant from several sites (typically a staircase corner)
/// takes the normalized sum of the unit vectors from each of them, i.e. their
/// bisector. Only such tied pixels can point at a neighbor of another label
/// (a diagonal pinch, or a one-pixel strip where the sum cancels); for them
/// the bisector, then each tied site, then the two directions along the ridge
/// are tried in turn, then the eight neighbor offsets, and the first that
/// stays inside the label is kept. Only a pixel with no same-label 8-neighbor
/// has none; it takes the bisector, or failing that the smallest-index site.
inline DirectionField gt_field(const LabelMap& gt, int threads = 1) {
  const BoundarySiteSet sites = boundary_sites(gt);
  if (sites.empty())
    throw Error(ErrorKind::Degenerate, "degenerate segmentation");
  const NearestSiteMap nearest =
      nearest_site_transform(sites, gt.width(), gt.height(), threads, true);

  DirectionField field(gt.width(), gt.height());
  std::vector<Vec2f> candidates;
  for (int r = 0; r < gt.height(); ++r) {
    for (int c = 0; c < gt.width(); ++c) {
      const std::size_t p = std::size_t(gt.index(r, c));
      const double len = std::sqrt(double(nearest.dist2_x4[p]));
      const auto ties = nearest.nearest_sites(p);
      const auto away = [&](std::int32_t k) {
        const BoundarySite& s = sites.sites[std::size_t(k)];
        return Vec2f{float((2.0 * r - s.row2) / len), float((2.0 * c - s.col2) / len)};
      };
      if (ties.size() == 1) {
        field[p] = away(ties[0]);
        continue;
      }

      candidates.clear();
      double sr = 0.0, sc = 0.0;
      for (std::int32_t k : ties) {
        const BoundarySite& s = sites.sites[std::size_t(k)];
        sr += (2.0 * r - s.row2) / len;
        sc += (2.0 * c - s.col2) / len;
      }
      const double n = std::sqrt(sr * sr + sc * sc);
      if (n >= 1e-9) candidates.push_back({float(sr / n), float(sc / n)});
      for (std::int32_t k : ties) candidates.push_back(away(k));
      const Vec2f first = away(ties[0]);
      candidates.push_back({first.dc, -first.dr});
      candidates.push_back({-first.dc, first.dr});
      for (const auto& off : kNeighbors8) candidates.push_back({float(off.ur), float(off.uc)});

      field[p] = candidates.front();
      for (const Vec2f& v : candidates) {
        const auto& off = kNeighbors8[std::size_t(pointed_neighbor(v))];
        const int rr = r + off.dr, cc = c + off.dc;
        if (!gt.contains(rr, cc) || gt(rr, cc) == gt[p]) {
          field[p] = v;
          break;
        }
      }
    }
  }
  return field;
}

/// Rotates a direction by `angle` radians (counter-clockwise in (col, row)
/// axes) and renormalizes in double precision.
inline Vec2f rotate(const Vec2f& v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double x = double(v.dc) * c - double(v.dr) * s;
  const double y = double(v.dc) * s + double(v.dr) * c;
  const double n = std::sqrt(x * x + y * y);
  return {float(y / n), float(x / n)};
}

/// Signed angle in (-pi, pi] that rotates `from` onto `to`.
inline double signed_angle(const Vec2f& from, const Vec2f& to) {
  const double cross = double(from.dc) * double(to.dr) - double(from.dr) * double(to.dc);
  return std::atan2(cross, dot(from, to));
}

/// Rotates each masked pixel's vector by an i.i.d. N(0, sigma_deg) angle.
/// Random draws happen only for masked pixels, in raster order.
inline DirectionField perturb(const DirectionField& field, double sigma_deg,
                              std::uint64_t seed,
                              std::span<const std::uint8_t> mask) {
  if (!(sigma_deg >= 0.0))
    throw Error(ErrorKind::InvalidArgument, "sigma_deg must be >= 0");
  if (!mask.empty() && mask.size() != field.size())
    throw Error(ErrorKind::DimensionMismatch, "perturb: mask size mismatch");
  DirectionField out = field;
  if (sigma_deg == 0.0) return out;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> angle(0.0, deg_to_rad(sigma_deg));
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!mask.empty() && mask[i] == 0) continue;
    out[i] = rotate(out[i], angle(rng));
  }
  return out;
}

inline DirectionField perturb(const DirectionField& field, double sigma_deg,
                              std::uint64_t seed) {
  return perturb(field, sigma_deg, seed, {});
}

struct FieldDiscrepancy {
  double total = 0.0;
  double l2_term = 0.0;
  double angle_term = 0.0;
};

/// Size-weighted L2 + angular discrepancy between a reference field and a
/// prediction. Each pixel is weighted by 1/sqrt(area of its region in `gt`).
inline FieldDiscrepancy field_discrepancy(const DirectionField& reference,
                                          const DirectionField& pred,
                                          const LabelMap& gt, double alpha = 1.0) {
  require_same_shape(reference, pred, "field_discrepancy");
  require_same_shape(reference, gt, "field_discrepancy");
  if (!(alpha >= 0.0)) throw Error(ErrorKind::InvalidArgument, "alpha must be >= 0");

  std::unordered_map<Label, std::size_t> area;
  for (Label l : gt.labels()) ++area[l];

  FieldDiscrepancy out;
  for (std::size_t i = 0; i < reference.size(); ++i) {
    const double w = 1.0 / std::sqrt(double(area[gt[i]]));
    const Vec2f& a = reference[i];
    const Vec2f& b = pred[i];
    const double er = double(a.dr) - double(b.dr);
    const double ec = double(a.dc) - double(b.dc);
    // atan2 keeps identical vectors at exactly zero even when their float
    // norms are a few ulps off 1, where acos of the dot product is not.
    const double cross = double(a.dr) * double(b.dc) - double(a.dc) * double(b.dr);
    const double theta = std::atan2(std::abs(cross), dot(a, b));
    out.l2_term += w * (er * er + ec * ec);
    out.angle_term += w * theta * theta;
  }
  out.total = out.l2_term + alpha * out.angle_term;
  return out;
}

}  // namespace superbpd
