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
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "superbpd/core.hpp"

// Region-based segmentation measures computed from a sparse contingency
// table: segmentation covering, Rand index (PRI over several ground truths)
// and variation of information in nats.

namespace superbpd {

/// Sparse co-occurrence counts. Row i is the i-th smallest predicted label,
/// column j the j-th smallest ground-truth label.
struct ContingencyTable {
  struct Entry {
    std::uint32_t row;
    std::uint32_t col;
    std::int64_t count;
  };

  std::vector<Label> row_labels;
  std::vector<Label> col_labels;
  std::vector<std::int64_t> row_sum;
  std::vector<std::int64_t> col_sum;
  std::vector<Entry> entries;  // sorted by (row, col), counts > 0
  std::int64_t total = 0;

  std::int64_t at(std::size_t row, std::size_t col) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), std::pair(row, col),
                               [](const Entry& e, const std::pair<std::size_t, std::size_t>& k) {
                                 return std::pair<std::size_t, std::size_t>(e.row, e.col) < k;
                               });
    if (it != entries.end() && it->row == row && it->col == col) return it->count;
    return 0;
  }
};

namespace detail {

inline std::vector<std::uint32_t> compact_labels(const LabelMap& m, std::vector<Label>& sorted) {
  sorted.assign(m.labels().begin(), m.labels().end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::unordered_map<Label, std::uint32_t> id;
  id.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) id.emplace(sorted[i], std::uint32_t(i));
  std::vector<std::uint32_t> out(m.size());
  for (std::size_t i = 0; i < m.size(); ++i) out[i] = id[m[i]];
  return out;
}

inline double pairs(double n) { return n * (n - 1.0) / 2.0; }

}  // namespace detail

inline ContingencyTable contingency(const LabelMap& pred, const LabelMap& gt) {
  require_same_shape(pred, gt, "contingency");
  ContingencyTable t;
  const auto rows = detail::compact_labels(pred, t.row_labels);
  const auto cols = detail::compact_labels(gt, t.col_labels);
  t.row_sum.assign(t.row_labels.size(), 0);
  t.col_sum.assign(t.col_labels.size(), 0);
  t.total = std::int64_t(pred.size());

  const std::uint64_t ncols = t.col_labels.size();
  std::unordered_map<std::uint64_t, std::int64_t> counts;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++counts[std::uint64_t(rows[i]) * ncols + cols[i]];
    ++t.row_sum[rows[i]];
    ++t.col_sum[cols[i]];
  }
  t.entries.reserve(counts.size());
  for (const auto& [key, n] : counts)
    t.entries.push_back({std::uint32_t(key / ncols), std::uint32_t(key % ncols), n});
  std::sort(t.entries.begin(), t.entries.end(), [](const auto& a, const auto& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return t;
}

/// (1/N) sum over ground-truth regions R of |R| * max IoU(R, R') over
/// predicted regions R'.
inline double covering(const ContingencyTable& t) {
  std::vector<double> best(t.col_labels.size(), 0.0);
  for (const auto& e : t.entries) {
    const double inter = double(e.count);
    const double uni = double(t.row_sum[e.row] + t.col_sum[e.col]) - inter;
    best[e.col] = std::max(best[e.col], inter / uni);
  }
  double sum = 0.0;
  for (std::size_t j = 0; j < best.size(); ++j) sum += double(t.col_sum[j]) * best[j];
  return sum / double(t.total);
}

/// Fraction of unordered pixel pairs on which both partitions agree.
inline double rand_index(const ContingencyTable& t) {
  const double all = detail::pairs(double(t.total));
  if (all == 0.0) return 1.0;
  double same_both = 0.0, same_pred = 0.0, same_gt = 0.0;
  for (const auto& e : t.entries) same_both += detail::pairs(double(e.count));
  for (auto n : t.row_sum) same_pred += detail::pairs(double(n));
  for (auto n : t.col_sum) same_gt += detail::pairs(double(n));
  return (all + 2.0 * same_both - same_pred - same_gt) / all;
}

/// H(pred | gt) + H(gt | pred), natural log.
inline double variation_of_information(const ContingencyTable& t) {
  const double n = double(t.total);
  auto plogp = [n](double c) { return c > 0.0 ? (c / n) * std::log(c / n) : 0.0; };
  double h_joint = 0.0, h_pred = 0.0, h_gt = 0.0;
  for (const auto& e : t.entries) h_joint -= plogp(double(e.count));
  for (auto c : t.row_sum) h_pred -= plogp(double(c));
  for (auto c : t.col_sum) h_gt -= plogp(double(c));
  return std::max(0.0, 2.0 * h_joint - h_pred - h_gt);
}

inline double covering(const LabelMap& pred, const LabelMap& gt) {
  return covering(contingency(pred, gt));
}

namespace detail {

template <typename Fn>
double mean_over(const LabelMap& pred, const std::vector<LabelMap>& gts, Fn fn) {
  if (gts.empty()) throw Error(ErrorKind::InvalidArgument, "no ground truth given");
  double sum = 0.0;
  for (const auto& gt : gts) sum += fn(contingency(pred, gt));
  return sum / double(gts.size());
}

}  // namespace detail

inline double covering(const LabelMap& pred, const std::vector<LabelMap>& gts) {
  return detail::mean_over(pred, gts, [](const ContingencyTable& t) { return covering(t); });
}

inline double pri(const LabelMap& pred, const std::vector<LabelMap>& gts) {
  return detail::mean_over(pred, gts, [](const ContingencyTable& t) { return rand_index(t); });
}

inline double vi(const LabelMap& pred, const std::vector<LabelMap>& gts) {
  return detail::mean_over(pred, gts,
                           [](const ContingencyTable& t) { return variation_of_information(t); });
}

struct MetricReport {
  double covering = 0.0;  // ground truth -> prediction direction
  double pri = 0.0;
  double vi = 0.0;        // nats
};

inline MetricReport evaluate(const ContingencyTable& t) {
  return {covering(t), rand_index(t), variation_of_information(t)};
}

/// Per-GT reports plus their arithmetic mean.
struct EvaluationResult {
  MetricReport mean;
  std::vector<MetricReport> per_gt;
};

inline EvaluationResult evaluate(const LabelMap& pred, const std::vector<LabelMap>& gts) {
  if (gts.empty()) throw Error(ErrorKind::InvalidArgument, "no ground truth given");
  EvaluationResult out;
  for (const auto& gt : gts) out.per_gt.push_back(evaluate(contingency(pred, gt)));
  for (const auto& r : out.per_gt) {
    out.mean.covering += r.covering;
    out.mean.pri += r.pri;
    out.mean.vi += r.vi;
  }
  const double k = double(gts.size());
  out.mean.covering /= k;
  out.mean.pri /= k;
  out.mean.vi /= k;
  return out;
}

/// "id<TAB>covering<TAB>pri<TAB>vi"
inline std::string format_report_line(const std::string& id, const MetricReport& r) {
  std::ostringstream os;
  os << id << std::fixed << std::setprecision(6) << '\t' << r.covering << '\t' << r.pri
     << '\t' << r.vi;
  return os.str();
}

}  // namespace superbpd
