// Copyright 2026 The camsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
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
#include <initializer_list>
#include <numbers>

namespace camsim {

// Counter-based splittable generator. Every consumer derives its own stream
// from (seed, path...) so sampling order is independent of scheduling:
// a Monte Carlo trial, a row, and a cell each get a stream keyed by their
// coordinates rather than by the order in which work items execute.
class SplitRng {
 public:
  explicit SplitRng(std::uint64_t seed) : state_(mix(seed ^ kStreamSalt)) {}

  /// Derive a child stream from a seed and a coordinate path.
  static SplitRng derive(std::uint64_t seed,
                         std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = mix(seed ^ kStreamSalt);
    for (std::uint64_t id : path) {
      s = mix(s ^ (id + 0x9e3779b97f4a7c15ull));
    }
    SplitRng rng(0);
    rng.state_ = s;
    return rng;
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ull;
    return mix(state_);
  }

  /// Uniform in [0, 1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the n used here (array dims).
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  bool next_bool() { return (next_u64() & 1u) != 0; }

  /// Standard normal draw (Box-Muller, pairs cached).
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    double u2 = next_double();
    // Avoid log(0).
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double phi = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
  }

 private:
  static constexpr std::uint64_t kStreamSalt = 0x8f1b'be4c'5a93'16d7ull;

  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// Stable string hashing for stream labels (FNV-1a).
inline constexpr std::uint64_t stream_tag(const char* label) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char* p = label; *p != '\0'; ++p) {
    h ^= static_cast<std::uint64_t>(*p);
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace camsim
