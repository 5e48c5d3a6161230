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
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Raster conventions used throughout the library:
//   * pixels are addressed as (row, col), row increasing downward;
//   * rasters are stored row-major, pixel index = row * width + col;
//   * direction vectors are stored as (d_row, d_col).

namespace superbpd {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  Degenerate,
  NoBoundary,
  Format,
  UnsupportedVersion,
  Validation,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

using PixelIndex = std::int32_t;
using Label = std::uint32_t;

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Angle between two unit vectors, arccos of the dot product clamped to [-1, 1].
inline double clamped_angle(double dot) {
  if (dot > 1.0) dot = 1.0;
  if (dot < -1.0) dot = -1.0;
  return std::acos(dot);
}

struct Vec2f {
  float dr = 0.0f;
  float dc = 1.0f;

  double norm() const {
    return std::sqrt(double(dr) * double(dr) + double(dc) * double(dc));
  }
  friend bool operator==(const Vec2f&, const Vec2f&) = default;
};

inline double dot(const Vec2f& a, const Vec2f& b) {
  return double(a.dr) * double(b.dr) + double(a.dc) * double(b.dc);
}

/// Width/height pair shared by all raster types.
class RasterShape {
 public:
  RasterShape() = default;
  RasterShape(int width, int height) : width_(width), height_(height) {
    if (width <= 0 || height <= 0)
      throw Error(ErrorKind::InvalidArgument,
                  "raster dimensions must be positive, got " +
                      std::to_string(width) + "x" + std::to_string(height));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept {
    return std::size_t(width_) * std::size_t(height_);
  }
  bool contains(int row, int col) const noexcept {
    return row >= 0 && col >= 0 && row < height_ && col < width_;
  }
  PixelIndex index(int row, int col) const noexcept {
    return PixelIndex(row * width_ + col);
  }
  Pixel pixel(PixelIndex idx) const noexcept {
    return {int(idx / width_), int(idx % width_)};
  }
  bool same_shape(const RasterShape& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_ = 0;
  int height_ = 0;
};

inline void require_same_shape(const RasterShape& a, const RasterShape& b,
                               const char* what) {
  if (!a.same_shape(b))
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + ": dimension mismatch (" +
                    std::to_string(a.width()) + "x" +
                    std::to_string(a.height()) + " vs " +
                    std::to_string(b.width()) + "x" +
                    std::to_string(b.height()) + ")");
}

/// Per-pixel region identifiers. Labels need not be contiguous.
class LabelMap : public RasterShape {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, Label fill = 0)
      : RasterShape(width, height), labels_(size(), fill) {}
  LabelMap(int width, int height, std::vector<Label> labels)
      : RasterShape(width, height), labels_(std::move(labels)) {
    if (labels_.size() != size())
      throw Error(ErrorKind::DimensionMismatch,
                  "label buffer size does not match dimensions");
  }

  Label operator()(int row, int col) const { return labels_[index(row, col)]; }
  Label& operator()(int row, int col) { return labels_[index(row, col)]; }
  Label operator[](std::size_t i) const { return labels_[i]; }
  Label& operator[](std::size_t i) { return labels_[i]; }

  std::span<const Label> labels() const noexcept { return labels_; }
  std::span<Label> labels() noexcept { return labels_; }

  friend bool operator==(const LabelMap& a, const LabelMap& b) {
    return a.same_shape(b) && a.labels_ == b.labels_;
  }

 private:
  std::vector<Label> labels_;
};

/// Number of distinct labels in a map.
inline std::size_t count_labels(const LabelMap& map) {
  std::vector<Label> sorted(map.labels().begin(), map.labels().end());
  std::sort(sorted.begin(), sorted.end());
  return std::size_t(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

inline constexpr double kUnitTolerance = 1e-4;

/// Per-pixel unit direction vectors.
class DirectionField : public RasterShape {
 public:
  DirectionField() = default;
  DirectionField(int width, int height, Vec2f fill = {0.0f, 1.0f})
      : RasterShape(width, height), vectors_(size(), fill) {}
  DirectionField(int width, int height, std::vector<Vec2f> vectors)
      : RasterShape(width, height), vectors_(std::move(vectors)) {
    if (vectors_.size() != size())
      throw Error(ErrorKind::DimensionMismatch,
                  "vector buffer size does not match dimensions");
  }

  const Vec2f& operator()(int row, int col) const {
    return vectors_[index(row, col)];
  }
  Vec2f& operator()(int row, int col) { return vectors_[index(row, col)]; }
  const Vec2f& operator[](std::size_t i) const { return vectors_[i]; }
  Vec2f& operator[](std::size_t i) { return vectors_[i]; }

  std::span<const Vec2f> vectors() const noexcept { return vectors_; }
  std::span<Vec2f> vectors() noexcept { return vectors_; }

  /// Largest deviation of any vector norm from 1.
  double max_norm_error() const {
    double worst = 0.0;
    for (const auto& v : vectors_) worst = std::max(worst, std::abs(v.norm() - 1.0));
    return worst;
  }

  bool is_unit(double tol = kUnitTolerance) const {
    return max_norm_error() <= tol;
  }

  void validate(double tol = kUnitTolerance) const {
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      const double n = vectors_[i].norm();
      if (!(std::abs(n - 1.0) <= tol))
        throw Error(ErrorKind::Validation,
                    "non-unit direction at pixel " + std::to_string(i) +
                        " (norm " + std::to_string(n) + ")");
    }
  }

  friend bool operator==(const DirectionField& a, const DirectionField& b) {
    return a.same_shape(b) && a.vectors_ == b.vectors_;
  }

 private:
  std::vector<Vec2f> vectors_;
};

/// 8-neighborhood in scan order N, NE, E, SE, S, SW, W, NW.
struct NeighborOffset {
  int dr;
  int dc;
  double ur;  // unit offset direction
  double uc;
};

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

inline constexpr std::array<NeighborOffset, 8> kNeighbors8{{
    {-1, 0, -1.0, 0.0},
    {-1, 1, -kInvSqrt2, kInvSqrt2},
    {0, 1, 0.0, 1.0},
    {1, 1, kInvSqrt2, kInvSqrt2},
    {1, 0, 1.0, 0.0},
    {1, -1, kInvSqrt2, -kInvSqrt2},
    {0, -1, 0.0, -1.0},
    {-1, -1, -kInvSqrt2, -kInvSqrt2},
}};

/// Index into kNeighbors8 of the offset best aligned with `v`. Exact ties keep
/// the earlier neighbor in scan order.
inline int pointed_neighbor(const Vec2f& v) {
  int best = 0;
  double best_dot = -2.0;
  for (int k = 0; k < 8; ++k) {
    const double d = double(v.dr) * kNeighbors8[k].ur + double(v.dc) * kNeighbors8[k].uc;
    if (d > best_dot) {
      best_dot = d;
      best = k;
    }
  }
  return best;
}

}  // namespace superbpd
