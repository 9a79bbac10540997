// Copyright 2026 The fedcef Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_01.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "fedcef/core/error.hpp"

namespace fedcef {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace detail

/// A named, replayable random stream.
///
/// The engine is keyed by (seed, label) only, so two streams with the same key
/// produce the same sequence on every platform: std::mt19937_64 is fully
/// specified by the standard and the distributions come from Boost.Random,
/// whose algorithms do not vary between standard libraries.
class RngStream {
 public:
  using engine_type = std::mt19937_64;

  RngStream(std::uint64_t seed, std::string label)
      : seed_(seed), label_(std::move(label)), engine_(key(seed_, label_)) {}

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  // Child stream "<label>/<suffix>" with the same seed.
  [[nodiscard]] RngStream derive(std::string_view suffix) const {
    return RngStream(seed_, label_ + "/" + std::string(suffix));
  }

  std::uint64_t next_u64() { return engine_(); }

  double uniform01() { return boost::random::uniform_01<double>{}(engine_); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() { return boost::random::normal_distribution<double>{0.0, 1.0}(engine_); }

  double gamma(double shape) {
    return boost::random::gamma_distribution<double>{shape, 1.0}(engine_);
  }

  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    if (n == 0) throw DomainError("RngStream::index: empty range");
    return boost::random::uniform_int_distribution<std::size_t>{0, n - 1}(engine_);
  }

  engine_type& engine() noexcept { return engine_; }

 private:
  static std::uint64_t key(std::uint64_t seed, const std::string& label) {
    if (label.empty()) throw DomainError("derive_stream: label must be nonempty");
    return detail::splitmix64(detail::splitmix64(seed) ^ detail::fnv1a64(label));
  }

  std::uint64_t seed_;
  std::string label_;
  engine_type engine_;
};

inline RngStream derive_stream(std::uint64_t seed, std::string label) {
  return RngStream(seed, std::move(label));
}

}  // namespace fedcef
