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

#include <cstdint>
#include <random>
#include <vector>

#include "superbpd/core.hpp"

// Seeded synthetic label maps used by the benchmarks and test suites.
//
// voronoi: k sites drawn uniformly (std::mt19937_64, uniform_real over the
// raster) and every pixel takes the index of its nearest site in squared
// Euclidean distance, ties to the smaller index. The other generators are
// closed-form.

namespace superbpd::synth {

inline LabelMap voronoi(int width, int height, int sites, std::uint64_t seed) {
  if (sites < 1) throw Error(ErrorKind::InvalidArgument, "voronoi needs at least one site");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> ur(0.0, double(height));
  std::uniform_real_distribution<double> uc(0.0, double(width));
  std::vector<double> sr(static_cast<std::size_t>(sites));
  std::vector<double> sc(static_cast<std::size_t>(sites));
  for (int k = 0; k < sites; ++k) {
    sr[std::size_t(k)] = ur(rng);
    sc[std::size_t(k)] = uc(rng);
  }
  LabelMap map(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      int best = 0;
      double best_d = 1e300;
      for (int k = 0; k < sites; ++k) {
        const double dr = r - sr[std::size_t(k)];
        const double dc = c - sc[std::size_t(k)];
        const double d = dr * dr + dc * dc;
        if (d < best_d) {
          best_d = d;
          best = k;
        }
      }
      map(r, c) = Label(best);
    }
  }
  return map;
}

/// Label 1 inside the closed disc, 0 outside.
inline LabelMap disc(int width, int height, double center_row, double center_col,
                     double radius) {
  LabelMap map(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const double dr = r - center_row;
      const double dc = c - center_col;
      map(r, c) = dr * dr + dc * dc <= radius * radius ? 1 : 0;
    }
  return map;
}

/// `levels` concentric rectangles; level k spans the margin k * step inset.
inline LabelMap nested_rectangles(int width, int height, int levels) {
  if (levels < 1) throw Error(ErrorKind::InvalidArgument, "levels must be >= 1");
  LabelMap map(width, height);
  const int step_r = height / (2 * (levels + 1));
  const int step_c = width / (2 * (levels + 1));
  for (int r = 0; r < height; ++r)
    for (int c = 0; c < width; ++c) {
      const int depth = std::min({r / std::max(step_r, 1), c / std::max(step_c, 1),
                                  (height - 1 - r) / std::max(step_r, 1),
                                  (width - 1 - c) / std::max(step_c, 1)});
      map(r, c) = Label(std::min(depth, levels));
    }
  return map;
}

/// Left half 0, right half 1 (split at column width/2).
inline LabelMap vertical_halves(int width, int height) {
  LabelMap map(width, height);
  for (int r = 0; r < height; ++r)
    for (int c = width / 2; c < width; ++c) map(r, c) = 1;
  return map;
}

}  // namespace superbpd::synth
