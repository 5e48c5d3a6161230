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

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "superbpd/superbpd.hpp"

// Settings shared by the command-line subcommands. Values are resolved in
// three layers: built-in defaults, then a key=value config file, then flags.

namespace superbpd::cli {

/// Bad flags, bad config files, unreadable inputs: exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Settings {
  PartitionConfig part;
  SegConfig seg;
  double sigma_deg = 0.0;
  std::uint64_t seed = 0;
  int threads = 1;
};

/// Optional overrides collected from the command line.
struct Overrides {
  std::optional<double> theta_a_deg;
  std::optional<double> s0;
  std::optional<double> theta_l;
  std::optional<double> theta_s;
  std::optional<std::int64_t> a_s;
  std::optional<std::int64_t> a_t;
  std::optional<int> steps;
  std::optional<double> sigma_deg;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_real(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || *end != '\0' || !std::isfinite(v))
    throw UsageError("invalid number for " + key + ": '" + text + "'");
  return v;
}

inline std::int64_t parse_int(const std::string& key, const std::string& text) {
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0')
    throw UsageError("invalid integer for " + key + ": '" + text + "'");
  return v;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  if (text.empty() || text[0] == '-')
    throw UsageError("invalid unsigned integer for " + key + ": '" + text + "'");
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (*end != '\0') throw UsageError("invalid unsigned integer for " + key + ": '" + text + "'");
  return v;
}

}  // namespace detail

/// Defaults, with the thread count taken from SUPERBPD_THREADS when set.
inline Settings default_settings() {
  Settings s;
  if (const char* env = std::getenv("SUPERBPD_THREADS"); env && *env) {
    const auto n = detail::parse_int("SUPERBPD_THREADS", env);
    if (n < 1 || n > 1024) throw UsageError("SUPERBPD_THREADS must lie in [1, 1024]");
    s.threads = int(n);
  }
  return s;
}

/// Applies one config entry. Angles follow the flag units: theta_a and sigma
/// in degrees, s0/theta_l/theta_s in radians.
inline void apply_setting(Settings& s, const std::string& key, const std::string& value) {
  if (key == "theta_a") s.part.theta_a_deg = detail::parse_real(key, value);
  else if (key == "s0") s.seg.s0 = detail::parse_real(key, value);
  else if (key == "theta_l") s.seg.theta_l = detail::parse_real(key, value);
  else if (key == "theta_s") s.seg.theta_s = detail::parse_real(key, value);
  else if (key == "a_s") s.seg.a_s = detail::parse_int(key, value);
  else if (key == "a_t") s.seg.a_t = detail::parse_int(key, value);
  else if (key == "steps") {
    const auto v = detail::parse_int(key, value);
    if (v < 0 || v > 1'000'000) throw UsageError("steps must lie in [0, 1000000]");
    s.seg.steps = int(v);
  } else if (key == "sigma") s.sigma_deg = detail::parse_real(key, value);
  else if (key == "seed") s.seed = detail::parse_uint(key, value);
  else if (key == "threads") {
    const auto v = detail::parse_int(key, value);
    if (v < 1 || v > 1024) throw UsageError("threads must lie in [1, 1024]");
    s.threads = int(v);
  } else {
    throw UsageError("unknown config key '" + key + "'");
  }
}

/// Parses "key = value" lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw UsageError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty()) throw UsageError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

inline void apply_config_file(Settings& s, const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  for (const auto& [k, v] : parse_config_text(buf.str())) apply_setting(s, k, v);
}

inline void apply_overrides(Settings& s, const Overrides& o) {
  if (o.theta_a_deg) s.part.theta_a_deg = *o.theta_a_deg;
  if (o.s0) s.seg.s0 = *o.s0;
  if (o.theta_l) s.seg.theta_l = *o.theta_l;
  if (o.theta_s) s.seg.theta_s = *o.theta_s;
  if (o.a_s) s.seg.a_s = *o.a_s;
  if (o.a_t) s.seg.a_t = *o.a_t;
  if (o.steps) s.seg.steps = *o.steps;
  if (o.sigma_deg) s.sigma_deg = *o.sigma_deg;
  if (o.seed) s.seed = *o.seed;
  if (o.threads) s.threads = *o.threads;
}

/// Range checks run before any computation; failures are usage errors.
inline void validate(const Settings& s) {
  try {
    s.part.validate();
    s.seg.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  if (!(s.sigma_deg >= 0.0 && s.sigma_deg <= 360.0))
    throw UsageError("sigma must lie in [0, 360] degrees");
  if (s.threads < 1 || s.threads > 1024) throw UsageError("threads must lie in [1, 1024]");
}

}  // namespace superbpd::cli
