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

#include <string>
#include <vector>

#include "superbpd/synthetic.hpp"

namespace fixtures {

struct Fixture {
  std::string name;
  superbpd::LabelMap labels;
};

/// The twenty seeded synthetic label maps used for recovery and robustness
/// checks: twelve Voronoi maps (k = 3..8, two rounds, sizes cycling through
/// 128/192/256, seed 1000 + i), four discs and four nested-rectangle maps.
inline std::vector<Fixture> synthetic_suite() {
  using namespace superbpd::synth;
  std::vector<Fixture> out;
  for (int i = 0; i < 12; ++i) {
    const int size = 128 + (i % 3) * 64;
    const int k = 3 + i % 6;
    out.push_back({"voronoi_k" + std::to_string(k) + "_" + std::to_string(size) + "_s" +
                       std::to_string(1000 + i),
                   voronoi(size, size, k, std::uint64_t(1000 + i))});
  }
  out.push_back({"disc_128", disc(128, 128, 64, 64, 40)});
  out.push_back({"disc_160x192", disc(192, 160, 80, 90, 50)});
  out.push_back({"disc_256", disc(256, 256, 100, 140, 70)});
  out.push_back({"disc_200_small", disc(200, 200, 100, 100, 30)});
  out.push_back({"rects_128_l2", nested_rectangles(128, 128, 2)});
  out.push_back({"rects_192_l3", nested_rectangles(192, 192, 3)});
  out.push_back({"rects_256x200_l3", nested_rectangles(256, 200, 3)});
  out.push_back({"rects_256_l4", nested_rectangles(256, 256, 4)});
  return out;
}

/// Per-fixture noise seed for the robustness run.
inline std::uint64_t noise_seed(std::size_t i) { return 77 + i; }

}  // namespace fixtures
