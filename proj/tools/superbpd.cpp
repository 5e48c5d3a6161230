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

// superbpd: command-line front end for the super-BPD segmentation pipeline.
//
// Exit codes: 0 success, 1 computation error, 2 usage or I/O error. Each run
// emits one JSON manifest (to --manifest FILE, or as a single line on stderr).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cli_config.hpp"
#include "superbpd/superbpd.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace superbpd;
using cli::UsageError;

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
  return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

/// Outputs are written to a sibling temp file and renamed into place, so a
/// failing run never leaves a partial file; committed outputs are removed if
/// a later step fails.
class OutputSet {
 public:
  void write(const std::string& path, const std::string& bytes) {
    const std::string tmp = path + ".partial";
    try {
      io::write_file(tmp, bytes);
      fs::rename(tmp, path);
    } catch (...) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw;
    }
    committed_.push_back(path);
  }

  void rollback() {
    for (const auto& p : committed_) {
      std::error_code ec;
      fs::remove(p, ec);
    }
    committed_.clear();
  }

  const std::vector<std::string>& paths() const { return committed_; }

 private:
  std::vector<std::string> committed_;
};

struct Run {
  std::string command;
  std::vector<std::string> inputs;
  cli::Settings settings;
  json timings = json::object();
  json extra = json::object();
  OutputSet outputs;
};

// Reading inputs: any failure to open or decode a file is an I/O-class error.
template <typename Fn>
auto load(const std::string& path, Fn fn) {
  try {
    return fn(path);
  } catch (const Error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

LabelMap load_labels(const std::string& path) {
  return load(path, [](const std::string& p) { return read_labels(p); });
}

DirectionField load_field(const std::string& path) {
  return load(path, [](const std::string& p) { return read_field(p); });
}

json config_json(const cli::Settings& s) {
  json j;
  j["theta_a"] = s.part.theta_a_deg;
  j["s0"] = s.seg.s0;
  j["theta_l"] = s.seg.theta_l;
  j["theta_s"] = s.seg.theta_s;
  j["a_s"] = s.seg.a_s;
  j["a_t"] = s.seg.a_t;
  j["steps"] = s.seg.steps;
  j["sigma"] = s.sigma_deg;
  j["seed"] = s.seed;
  j["threads"] = s.threads;
  return j;
}

json stage_json(const StageTimings& t) {
  json j;
  j["forest"] = t.forest_ms;
  j["merge_roots"] = t.merge_roots_ms;
  j["rag"] = t.rag_ms;
  j["similarity"] = t.similarity_ms;
  j["partition"] = t.partition_ms;
  j["relabel"] = t.relabel_ms;
  j["post_field_total"] = t.total_ms();
  return j;
}

void emit_manifest(const Run& run, const std::string& manifest_path, int exit_code,
                   const std::string& error) {
  json m;
  m["command"] = run.command;
  m["inputs"] = run.inputs;
  m["outputs"] = run.outputs.paths();
  m["config"] = config_json(run.settings);
  m["seed"] = run.settings.seed;
  m["wall_ms"] = run.timings;
  for (const auto& [k, v] : run.extra.items()) m[k] = v;
  m["exit_code"] = exit_code;
  if (!error.empty()) m["error"] = error;
  if (manifest_path.empty()) {
    std::cerr << m.dump() << '\n';
    return;
  }
  try {
    io::write_file(manifest_path, m.dump(2) + "\n");
  } catch (const Error& e) {
    std::cerr << "superbpd: cannot write manifest: " << e.what() << '\n';
  }
}

std::string fmt_ms(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3) << v;
  return os.str();
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- commands

struct Paths {
  std::string in;
  std::string out;
  std::string viz;
};

void cmd_gt_field(Run& run, const Paths& p) {
  run.inputs = {p.in};
  const LabelMap labels = load_labels(p.in);
  auto t0 = clock_type::now();
  const DirectionField field = gt_field(labels, run.settings.threads);
  run.timings["gt_field"] = ms_since(t0);
  run.outputs.write(p.out, encode_field(field));
  if (!p.viz.empty()) run.outputs.write(p.viz, encode_ppm(viz_field(field)));
}

void cmd_partition(Run& run, const Paths& p) {
  run.inputs = {p.in};
  const DirectionField field = load_field(p.in);
  auto t0 = clock_type::now();
  const ParentForest forest = build_forest(field, run.settings.part);
  const LabelMap labels = flatten(forest);
  run.timings["forest"] = ms_since(t0);
  run.extra["super_bpds"] = forest.roots.size();
  if (forest.roots.size() > 65536)
    throw Error(ErrorKind::InvalidArgument,
                std::to_string(forest.roots.size()) +
                    " super-BPDs exceed the 16-bit label range of the output format");
  run.outputs.write(p.out, encode_labels(labels));
  if (!p.viz.empty())
    run.outputs.write(p.viz, encode_ppm(viz_boundaries(viz_field(field), labels, {0, 0, 0})));
}

void cmd_segment(Run& run, const Paths& p, bool timing) {
  run.inputs = {p.in};
  const DirectionField field = load_field(p.in);
  StageTimings t;
  const LabelMap labels = segment(field, run.settings.part, run.settings.seg, &t);
  run.timings = timing ? stage_json(t) : json{{"post_field_total", t.total_ms()}};
  run.extra["regions"] = count_labels(labels);
  run.outputs.write(p.out, encode_labels(labels));
  if (!p.viz.empty())
    run.outputs.write(p.viz, encode_ppm(viz_boundaries(std::nullopt, labels)));
  if (timing) {
    std::cerr << "forest " << fmt_ms(t.forest_ms) << " ms, merge_roots "
              << fmt_ms(t.merge_roots_ms) << " ms, rag " << fmt_ms(t.rag_ms)
              << " ms, similarity " << fmt_ms(t.similarity_ms) << " ms, partition "
              << fmt_ms(t.partition_ms) << " ms, relabel " << fmt_ms(t.relabel_ms)
              << " ms, total " << fmt_ms(t.total_ms()) << " ms\n";
  }
}

void cmd_perturb(Run& run, const Paths& p) {
  run.inputs = {p.in};
  const DirectionField field = load_field(p.in);
  auto t0 = clock_type::now();
  const DirectionField out = perturb(field, run.settings.sigma_deg, run.settings.seed);
  run.timings["perturb"] = ms_since(t0);
  run.outputs.write(p.out, encode_field(out));
}

void cmd_eval(Run& run, const std::string& pred_path, const std::vector<std::string>& gt_paths,
              const std::string& id, const std::string& out_path, bool detail, bool header) {
  run.inputs = {pred_path};
  run.inputs.insert(run.inputs.end(), gt_paths.begin(), gt_paths.end());
  const LabelMap pred = load_labels(pred_path);
  std::vector<LabelMap> gts;
  for (const auto& g : gt_paths) {
    gts.push_back(load_labels(g));
    if (!gts.back().same_shape(pred))
      throw UsageError(g + ": dimensions differ from " + pred_path);
  }
  auto t0 = clock_type::now();
  const EvaluationResult res = evaluate(pred, gts);
  run.timings["eval"] = ms_since(t0);

  std::ostringstream os;
  if (header) os << "# id\tcovering(gt->pred)\tpri\tvi(nats)\n";
  os << format_report_line(id.empty() ? fs::path(pred_path).filename().string() : id, res.mean)
     << '\n';
  if (detail) {
    for (std::size_t k = 0; k < res.per_gt.size(); ++k) {
      const auto& r = res.per_gt[k];
      os << "gt " << k << " path=" << gt_paths[k] << std::fixed << std::setprecision(6)
         << " covering=" << r.covering << " pri=" << r.pri << " vi=" << r.vi << '\n';
    }
  }
  run.extra["vi_units"] = "nats";
  run.extra["covering_direction"] = "gt->pred";
  if (out_path.empty())
    std::cout << os.str();
  else
    run.outputs.write(out_path, os.str());
}

struct BenchSize {
  int width;
  int height;
};

BenchSize parse_size(const std::string& s) {
  int w = 0, h = 0;
  char x = 0;
  std::istringstream in(s);
  if (s.find('x') != std::string::npos) {
    if (!(in >> w >> x >> h) || x != 'x' || !in.eof())
      throw UsageError("invalid size '" + s + "' (expected N or WxH)");
  } else {
    if (!(in >> w) || !in.eof()) throw UsageError("invalid size '" + s + "' (expected N or WxH)");
    h = w;
  }
  if (w < 2 || h < 2 || w > 16384 || h > 16384)
    throw UsageError("size '" + s + "' out of range [2, 16384]");
  return {w, h};
}

void cmd_bench(Run& run, const std::vector<std::string>& size_args, int runs, int sites,
               const std::string& labels_dir, const std::string& table_path) {
  std::vector<BenchSize> sizes;
  for (const auto& s : size_args) sizes.push_back(parse_size(s));
  if (sizes.empty()) sizes = {{192, 192}, {384, 384}, {768, 768}};
  if (!labels_dir.empty() && !fs::is_directory(labels_dir))
    throw UsageError("labels directory does not exist: " + labels_dir);

  std::ostringstream table;
  table << "# post-field wall time per stage, median of " << runs << " runs (ms)\n";
  table << "size\tpixels\tforest\tmerge_roots\trag\tsimilarity\tpartition\trelabel\ttotal"
           "\tratio\tratio_per_doubling\n";
  json rows = json::array();
  double prev_total = 0.0;
  std::int64_t prev_pixels = 0;

  struct Case {
    DirectionField field;
    LabelMap labels;
    std::vector<double> st[7];
  };
  std::vector<Case> cases(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const LabelMap gt = synth::voronoi(sizes[i].width, sizes[i].height, sites, run.settings.seed);
    cases[i].field = gt_field(gt, run.settings.threads);
    if (run.settings.sigma_deg > 0.0)
      cases[i].field = perturb(cases[i].field, run.settings.sigma_deg, run.settings.seed);
    cases[i].labels = segment(cases[i].field, run.settings.part, run.settings.seg);  // warm-up
  }
  // Rounds interleave the sizes so drift in machine speed hits all of them.
  for (int k = 0; k < runs; ++k)
    for (auto& cs : cases) {
      StageTimings t;
      cs.labels = segment(cs.field, run.settings.part, run.settings.seg, &t);
      cs.st[0].push_back(t.forest_ms);
      cs.st[1].push_back(t.merge_roots_ms);
      cs.st[2].push_back(t.rag_ms);
      cs.st[3].push_back(t.similarity_ms);
      cs.st[4].push_back(t.partition_ms);
      cs.st[5].push_back(t.relabel_ms);
      cs.st[6].push_back(t.total_ms());
    }

  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const BenchSize& sz = sizes[i];
    const LabelMap& labels = cases[i].labels;
    auto& st = cases[i].st;
    const std::string name = std::to_string(sz.width) + "x" + std::to_string(sz.height);
    if (!labels_dir.empty())
      run.outputs.write((fs::path(labels_dir) / ("voronoi_" + name + ".pgm")).string(),
                        encode_labels(labels));
    const std::int64_t pixels = std::int64_t(sz.width) * sz.height;
    const double total = median(st[6]);
    table << name << '\t' << pixels;
    for (auto& v : st) table << '\t' << fmt_ms(median(v));
    json row = {{"size", name}, {"pixels", pixels}, {"median_total_ms", total}};
    if (prev_pixels > 0 && prev_total > 0.0 && pixels != prev_pixels) {
      const double ratio = total / prev_total;
      const double doublings = std::log2(double(pixels) / double(prev_pixels));
      const double per_doubling = std::pow(ratio, 1.0 / doublings);
      table << '\t' << std::fixed << std::setprecision(3) << ratio << '\t' << per_doubling;
      row["ratio"] = ratio;
      row["ratio_per_doubling"] = per_doubling;
    } else {
      table << "\t-\t-";
    }
    table << '\n';
    rows.push_back(row);
    prev_total = total;
    prev_pixels = pixels;
  }
  run.extra["bench"] = rows;
  run.extra["sites"] = sites;
  run.extra["runs"] = runs;
  if (table_path.empty())
    std::cout << table.str();
  else
    run.outputs.write(table_path, table.str());
}

void cmd_synth(Run& run, const std::string& kind, int width, int height, int sites,
               const std::string& out) {
  LabelMap labels;
  if (kind == "voronoi") {
    labels = synth::voronoi(width, height, sites, run.settings.seed);
  } else if (kind == "disc") {
    labels = synth::disc(width, height, height / 2.0, width / 2.0, std::min(width, height) / 4.0);
  } else if (kind == "rectangles") {
    labels = synth::nested_rectangles(width, height, std::max(1, sites));
  } else if (kind == "halves") {
    labels = synth::vertical_halves(width, height);
  } else {
    throw UsageError("unknown synthetic kind '" + kind + "'");
  }
  run.outputs.write(out, encode_labels(labels));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"superbpd: super-BPD segmentation from boundary-to-pixel direction fields"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "superbpd 1.0.0");

  std::string config_path, manifest_path;
  cli::Overrides ov;
  app.add_option("--config", config_path, "key = value settings file (flags take precedence)");
  app.add_option("--manifest", manifest_path, "write the run manifest here instead of stderr");
  app.add_option("--threads", ov.threads,
                 "worker threads for the distance transform (default: $SUPERBPD_THREADS or 1)");

  auto add_partition_flags = [&](CLI::App* sub) {
    sub->add_option("--theta-a", ov.theta_a_deg, "direction agreement threshold, degrees (45)");
  };
  auto add_segment_flags = [&](CLI::App* sub) {
    add_partition_flags(sub);
    sub->add_option("--s0", ov.s0, "repulsion threshold, radians (pi/18)");
    sub->add_option("--theta-l", ov.theta_l, "merge threshold for large regions, radians");
    sub->add_option("--theta-s", ov.theta_s, "merge threshold for small regions, radians");
    sub->add_option("--a-s", ov.a_s, "large-region area, pixels (1500)");
    sub->add_option("--a-t", ov.a_t, "tiny-region area, pixels (200)");
    sub->add_option("--steps", ov.steps, "parent steps walked for similarity (3)");
  };

  Paths paths;
  auto* gt = app.add_subcommand("gt-field", "label map (16-bit PGM) -> direction field (BPDF)");
  gt->add_option("labels", paths.in, "input label map")->required();
  gt->add_option("field", paths.out, "output field")->required();
  gt->add_option("--viz", paths.viz, "also write a color-wheel PPM");

  auto* part = app.add_subcommand("partition", "direction field -> super-BPD label map");
  part->add_option("field", paths.in, "input field")->required();
  part->add_option("labels", paths.out, "output label map")->required();
  part->add_option("--viz", paths.viz, "also write a PPM with super-BPD boundaries");
  add_partition_flags(part);

  bool timing = false;
  auto* seg = app.add_subcommand("segment", "direction field -> final segmentation");
  seg->add_option("field", paths.in, "input field")->required();
  seg->add_option("labels", paths.out, "output label map")->required();
  seg->add_option("--viz", paths.viz, "also write a PPM with region boundaries");
  seg->add_flag("--timing", timing, "report per-stage wall time");
  add_segment_flags(seg);

  auto* pert = app.add_subcommand("perturb", "rotate every vector by Gaussian angle noise");
  pert->add_option("field", paths.in, "input field")->required();
  pert->add_option("out", paths.out, "output field")->required();
  pert->add_option("--sigma", ov.sigma_deg, "noise standard deviation, degrees");
  pert->add_option("--seed", ov.seed, "random seed");

  std::string pred_path, eval_id, eval_out;
  std::vector<std::string> gt_paths;
  bool detail = false, header = false;
  auto* ev = app.add_subcommand(
      "eval", "covering (gt->pred), PRI, VI (nats) as one tab-separated line");
  ev->add_option("pred", pred_path, "predicted label map")->required();
  ev->add_option("gt", gt_paths, "one or more ground-truth label maps")->required();
  ev->add_option("--id", eval_id, "image id for the report (default: file name)");
  ev->add_option("--out", eval_out, "write the report to a file instead of stdout");
  ev->add_flag("--detail", detail, "append one record per ground truth");
  ev->add_flag("--header", header, "print a column header line");

  std::vector<std::string> bench_sizes;
  int runs = 5, sites = 16;
  std::string labels_dir, table_path;
  auto* bench = app.add_subcommand("bench", "time the post-field pipeline on synthetic fields");
  bench->add_option("sizes", bench_sizes, "N or WxH (default: 192 384 768)");
  bench->add_option("--runs", runs, "repetitions per size (median reported)")
      ->check(CLI::Range(1, 1000));
  bench->add_option("--sites", sites, "Voronoi sites")->check(CLI::Range(2, 65535));
  bench->add_option("--seed", ov.seed, "generator seed");
  bench->add_option("--sigma", ov.sigma_deg, "optional angle noise, degrees");
  bench->add_option("--labels-dir", labels_dir, "write final label maps here");
  bench->add_option("--out", table_path, "write the table to a file instead of stdout");
  add_segment_flags(bench);

  std::string synth_kind = "voronoi", synth_out;
  int synth_w = 256, synth_h = 256, synth_sites = 8;
  auto* syn = app.add_subcommand("synth", "write a seeded synthetic label map");
  syn->add_option("kind", synth_kind, "voronoi | disc | rectangles | halves")->required();
  syn->add_option("out", synth_out, "output label map")->required();
  syn->add_option("--width", synth_w, "pixels")->check(CLI::Range(2, 16384));
  syn->add_option("--height", synth_h, "pixels")->check(CLI::Range(2, 16384));
  syn->add_option("--sites", synth_sites, "Voronoi sites / rectangle levels")
      ->check(CLI::Range(1, 65535));
  syn->add_option("--seed", ov.seed, "generator seed");

  Run run;
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  run.command = app.get_subcommands().front()->get_name();

  int rc = 0;
  std::string error;
  try {
    run.settings = cli::default_settings();
    if (!config_path.empty()) cli::apply_config_file(run.settings, config_path);
    cli::apply_overrides(run.settings, ov);
    cli::validate(run.settings);

    if (gt->parsed()) cmd_gt_field(run, paths);
    else if (part->parsed()) cmd_partition(run, paths);
    else if (seg->parsed()) cmd_segment(run, paths, timing);
    else if (pert->parsed()) cmd_perturb(run, paths);
    else if (ev->parsed()) cmd_eval(run, pred_path, gt_paths, eval_id, eval_out, detail, header);
    else if (bench->parsed()) cmd_bench(run, bench_sizes, runs, sites, labels_dir, table_path);
    else if (syn->parsed()) cmd_synth(run, synth_kind, synth_w, synth_h, synth_sites, synth_out);
  } catch (const UsageError& e) {
    rc = 2;
    error = e.what();
  } catch (const Error& e) {
    rc = e.kind() == ErrorKind::Io ? 2 : 1;
    error = e.what();
  } catch (const std::exception& e) {
    rc = 1;
    error = e.what();
  }
  if (rc != 0) {
    run.outputs.rollback();
    std::cerr << "superbpd " << run.command << ": " << error << '\n';
  }
  emit_manifest(run, manifest_path, rc, error);
  return rc;
}
