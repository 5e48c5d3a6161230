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

// Minimal end-to-end walk through the library: synthetic label map ->
// direction field -> noisy field -> super-BPDs -> segmentation -> metrics.
//
//   pipeline_demo [output-directory]

#include <filesystem>
#include <iostream>
#include <string>

#include "superbpd/superbpd.hpp"

int main(int argc, char** argv) {
  namespace sb = superbpd;
  const std::filesystem::path dir = argc > 1 ? argv[1] : ".";

  const sb::LabelMap gt = sb::synth::voronoi(256, 256, 6, 42);
  const sb::DirectionField clean = sb::gt_field(gt);
  const sb::DirectionField noisy = sb::perturb(clean, 10.0, 7);

  const sb::ParentForest forest = sb::build_forest(noisy, {});
  sb::StageTimings t;
  const sb::LabelMap seg = sb::segment(noisy, {}, {}, &t);
  const sb::MetricReport m = sb::evaluate(sb::contingency(seg, gt));

  std::cout << "super-BPDs:      " << forest.roots.size() << '\n'
            << "final regions:   " << sb::count_labels(seg) << " (ground truth "
            << sb::count_labels(gt) << ")\n"
            << "post-field time: " << t.total_ms() << " ms\n"
            << sb::format_report_line("voronoi6", m) << '\n';

  sb::write_ppm(sb::viz_field(noisy), (dir / "demo_field.ppm").string());
  sb::write_ppm(sb::viz_boundaries(sb::viz_field(noisy), seg),
                (dir / "demo_segments.ppm").string());
  sb::write_labels(seg, (dir / "demo_segments.pgm").string());
  return 0;
}
