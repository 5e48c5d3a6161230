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

#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "superbpd/core.hpp"

// File formats:
//   labels  16-bit binary PGM (P5, maxval 65535, big-endian samples)
//   images  8-bit binary PPM (P6, maxval 255)
//   fields  BPDF: "BPD1", u32 width, u32 height (little-endian), then
//           height*width pairs of little-endian f32 (d_row, d_col)

namespace superbpd {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

class RgbImage : public RasterShape {
 public:
  RgbImage() = default;
  RgbImage(int width, int height, Rgb fill = {255, 255, 255})
      : RasterShape(width, height), pixels_(size(), fill) {}

  const Rgb& operator[](std::size_t i) const { return pixels_[i]; }
  Rgb& operator[](std::size_t i) { return pixels_[i]; }
  const Rgb& operator()(int row, int col) const { return pixels_[index(row, col)]; }
  Rgb& operator()(int row, int col) { return pixels_[index(row, col)]; }

  friend bool operator==(const RgbImage& a, const RgbImage& b) {
    return a.same_shape(b) && a.pixels_ == b.pixels_;
  }

 private:
  std::vector<Rgb> pixels_;
};

namespace io {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

inline void write_file(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed: " + path);
}

// Netpbm header: magic, then width, height, maxval separated by whitespace or
// '#' comments, then exactly one whitespace byte before the payload.
struct NetpbmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t payload_offset = 0;
};

inline NetpbmHeader parse_netpbm_header(std::string_view data, std::string_view magic) {
  if (data.size() < 2 || data.substr(0, 2) != magic)
    throw Error(ErrorKind::Format, "expected " + std::string(magic) + " header");
  std::size_t pos = 2;
  auto read_int = [&](const char* what) -> long long {
    for (;;) {
      if (pos >= data.size())
        throw Error(ErrorKind::Format, std::string("truncated header reading ") + what);
      const unsigned char ch = static_cast<unsigned char>(data[pos]);
      if (std::isspace(ch)) {
        ++pos;
      } else if (ch == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    long long v = 0;
    std::size_t digits = 0;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
      v = v * 10 + (data[pos] - '0');
      if (v > (1LL << 31)) throw Error(ErrorKind::Format, std::string("oversized ") + what);
      ++pos;
      ++digits;
    }
    if (digits == 0) throw Error(ErrorKind::Format, std::string("malformed ") + what);
    return v;
  };
  NetpbmHeader h;
  const long long w = read_int("width");
  const long long ht = read_int("height");
  const long long mv = read_int("maxval");
  if (w <= 0 || ht <= 0 || w > (1 << 20) || ht > (1 << 20))
    throw Error(ErrorKind::Format, "invalid dimensions");
  if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos])))
    throw Error(ErrorKind::Format, "missing whitespace after maxval");
  h.width = int(w);
  h.height = int(ht);
  h.maxval = int(mv);
  h.payload_offset = pos + 1;
  return h;
}

inline void put_u32le(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(char((v >> (8 * k)) & 0xFF));
}

inline std::uint32_t get_u32le(std::string_view d, std::size_t off) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= std::uint32_t(static_cast<unsigned char>(d[off + k])) << (8 * k);
  return v;
}

}  // namespace io

inline std::string encode_labels(const LabelMap& map) {
  std::string out = "P5\n" + std::to_string(map.width()) + " " +
                    std::to_string(map.height()) + "\n65535\n";
  out.reserve(out.size() + 2 * map.size());
  for (Label l : map.labels()) {
    if (l > 65535)
      throw Error(ErrorKind::InvalidArgument,
                  "label " + std::to_string(l) + " does not fit a 16-bit PGM");
    out.push_back(char(l >> 8));
    out.push_back(char(l & 0xFF));
  }
  return out;
}

inline LabelMap decode_labels(std::string_view data) {
  const auto h = io::parse_netpbm_header(data, "P5");
  if (h.maxval != 65535)
    throw Error(ErrorKind::Format, "unsupported maxval " + std::to_string(h.maxval) +
                                       " (expected 65535)");
  const std::size_t n = std::size_t(h.width) * std::size_t(h.height);
  if (data.size() - h.payload_offset < 2 * n)
    throw Error(ErrorKind::Format, "truncated PGM payload");
  LabelMap map(h.width, h.height);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + h.payload_offset);
  for (std::size_t i = 0; i < n; ++i) map[i] = Label(p[2 * i]) << 8 | Label(p[2 * i + 1]);
  return map;
}

inline LabelMap read_labels(const std::string& path) {
  return decode_labels(io::read_file(path));
}

inline void write_labels(const LabelMap& map, const std::string& path) {
  io::write_file(path, encode_labels(map));
}

inline constexpr double kFieldReadTolerance = 1e-3;

inline std::string encode_field(const DirectionField& field) {
  std::string out = "BPD1";
  out.reserve(12 + 8 * field.size());
  io::put_u32le(out, std::uint32_t(field.width()));
  io::put_u32le(out, std::uint32_t(field.height()));
  for (const Vec2f& v : field.vectors()) {
    std::uint32_t bits;
    std::memcpy(&bits, &v.dr, 4);
    io::put_u32le(out, bits);
    std::memcpy(&bits, &v.dc, 4);
    io::put_u32le(out, bits);
  }
  return out;
}

inline DirectionField decode_field(std::string_view data) {
  if (data.size() < 12) throw Error(ErrorKind::Format, "truncated BPDF header");
  if (data.substr(0, 3) != "BPD") throw Error(ErrorKind::Format, "not a BPDF file");
  if (data[3] != '1') throw Error(ErrorKind::UnsupportedVersion, "unsupported version");
  const std::uint32_t w = io::get_u32le(data, 4);
  const std::uint32_t h = io::get_u32le(data, 8);
  if (w == 0 || h == 0 || w > (1u << 20) || h > (1u << 20))
    throw Error(ErrorKind::Format, "invalid BPDF dimensions");
  const std::size_t n = std::size_t(w) * std::size_t(h);
  if (data.size() != 12 + 8 * n) throw Error(ErrorKind::Format, "BPDF payload size mismatch");
  std::vector<Vec2f> vecs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t a = io::get_u32le(data, 12 + 8 * i);
    const std::uint32_t b = io::get_u32le(data, 16 + 8 * i);
    std::memcpy(&vecs[i].dr, &a, 4);
    std::memcpy(&vecs[i].dc, &b, 4);
  }
  DirectionField field(int(w), int(h), std::move(vecs));
  field.validate(kFieldReadTolerance);
  return field;
}

inline DirectionField read_field(const std::string& path) {
  return decode_field(io::read_file(path));
}

inline void write_field(const DirectionField& field, const std::string& path) {
  io::write_file(path, encode_field(field));
}

inline std::string encode_ppm(const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n255\n";
  out.reserve(out.size() + 3 * img.size());
  for (std::size_t i = 0; i < img.size(); ++i) {
    out.push_back(char(img[i].r));
    out.push_back(char(img[i].g));
    out.push_back(char(img[i].b));
  }
  return out;
}

inline RgbImage decode_ppm(std::string_view data) {
  const auto h = io::parse_netpbm_header(data, "P6");
  if (h.maxval != 255) throw Error(ErrorKind::Format, "only 8-bit PPM is supported");
  const std::size_t n = std::size_t(h.width) * std::size_t(h.height);
  if (data.size() - h.payload_offset < 3 * n)
    throw Error(ErrorKind::Format, "truncated PPM payload");
  RgbImage img(h.width, h.height);
  const auto* p = reinterpret_cast<const unsigned char*>(data.data() + h.payload_offset);
  for (std::size_t i = 0; i < n; ++i) img[i] = {p[3 * i], p[3 * i + 1], p[3 * i + 2]};
  return img;
}

inline RgbImage read_ppm(const std::string& path) { return decode_ppm(io::read_file(path)); }

inline void write_ppm(const RgbImage& img, const std::string& path) {
  io::write_file(path, encode_ppm(img));
}

/// Direction angle atan2(d_row, d_col) in degrees, in [0, 360).
inline double direction_hue(const Vec2f& v) {
  double deg = rad_to_deg(std::atan2(double(v.dr), double(v.dc)));
  if (deg < 0.0) deg += 360.0;
  if (deg >= 360.0) deg -= 360.0;
  return deg;
}

/// Fully saturated, full-value color for a hue in degrees.
inline Rgb hue_to_rgb(double hue_deg) {
  const double h = std::fmod(hue_deg, 360.0) / 60.0;
  const int sector = int(std::floor(h)) % 6;
  const double f = h - std::floor(h);
  double r = 0, g = 0, b = 0;
  switch (sector) {
    case 0: r = 1; g = f; b = 0; break;
    case 1: r = 1 - f; g = 1; b = 0; break;
    case 2: r = 0; g = 1; b = f; break;
    case 3: r = 0; g = 1 - f; b = 1; break;
    case 4: r = f; g = 0; b = 1; break;
    default: r = 1; g = 0; b = 1 - f; break;
  }
  auto q = [](double x) { return std::uint8_t(std::lround(x * 255.0)); };
  return {q(r), q(g), q(b)};
}

/// Color wheel rendering: east is red, south yellow-green, west cyan.
inline RgbImage viz_field(const DirectionField& field) {
  RgbImage img(field.width(), field.height());
  for (std::size_t i = 0; i < field.size(); ++i) img[i] = hue_to_rgb(direction_hue(field[i]));
  return img;
}

inline bool is_boundary_pixel(const LabelMap& labels, int r, int c) {
  const Label l = labels(r, c);
  return (r > 0 && labels(r - 1, c) != l) || (r + 1 < labels.height() && labels(r + 1, c) != l) ||
         (c > 0 && labels(r, c - 1) != l) || (c + 1 < labels.width() && labels(r, c + 1) != l);
}

/// Paints pixels with a differently-labeled 4-neighbor over `base` (or a white
/// canvas when no base is given).
inline RgbImage viz_boundaries(const std::optional<RgbImage>& base, const LabelMap& labels,
                               Rgb color = {255, 0, 0}) {
  RgbImage img = base ? *base : RgbImage(labels.width(), labels.height());
  require_same_shape(img, labels, "viz_boundaries");
  for (int r = 0; r < labels.height(); ++r)
    for (int c = 0; c < labels.width(); ++c)
      if (is_boundary_pixel(labels, r, c)) img(r, c) = color;
  return img;
}

}  // namespace superbpd
