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

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/core/rng.hpp"

namespace fedcef {

enum class CompressorKind { Identity, TopK, RandK };

inline std::string_view to_string(CompressorKind k) {
  switch (k) {
    case CompressorKind::Identity: return "identity";
    case CompressorKind::TopK: return "topk";
    case CompressorKind::RandK: return "randk";
  }
  return "?";
}

/// Retention given either as an element count or as a ratio of p.
struct RetainCount {
  std::size_t k;
  bool operator==(const RetainCount&) const = default;
};
struct RetainRatio {
  double r;
  bool operator==(const RetainRatio&) const = default;
};
using Retain = std::variant<RetainCount, RetainRatio>;

/// Declarative description of a contractive compressor.
struct CompressorSpec {
  CompressorKind kind = CompressorKind::Identity;
  Retain retain = RetainRatio{1.0};

  static CompressorSpec identity() { return {CompressorKind::Identity, RetainRatio{1.0}}; }
  static CompressorSpec top_k(std::size_t k) { return {CompressorKind::TopK, RetainCount{k}}; }
  static CompressorSpec top_ratio(double r) { return {CompressorKind::TopK, RetainRatio{r}}; }
  static CompressorSpec rand_k(std::size_t k) { return {CompressorKind::RandK, RetainCount{k}}; }
  static CompressorSpec rand_ratio(double r) { return {CompressorKind::RandK, RetainRatio{r}}; }

  // Number of retained coordinates at dimension p. Ratios use ceil(r * p),
  // clamped to at least one coordinate.
  [[nodiscard]] std::size_t resolve(std::size_t dim) const {
    if (dim == 0) throw DomainError("CompressorSpec::resolve: dimension must be >= 1");
    if (kind == CompressorKind::Identity) return dim;
    std::size_t k = 0;
    if (const auto* c = std::get_if<RetainCount>(&retain)) {
      if (c->k == 0) throw DomainError("CompressorSpec: retain count must be >= 1");
      k = c->k;
    } else {
      const double r = std::get<RetainRatio>(retain).r;
      if (!(r > 0.0 && r <= 1.0)) throw DomainError("CompressorSpec: retain ratio must lie in (0, 1]");
      k = static_cast<std::size_t>(std::ceil(r * static_cast<double>(dim)));
      k = std::max<std::size_t>(k, 1);
    }
    if (k > dim) {
      throw DomainError("CompressorSpec: k = " + std::to_string(k) + " exceeds dimension " +
                        std::to_string(dim));
    }
    return k;
  }

  bool operator==(const CompressorSpec&) const = default;
};

// q^2 of the contraction inequality E||C(x) - x||^2 <= q^2 ||x||^2.
inline double contraction_factor(const CompressorSpec& spec, std::size_t dim) {
  if (spec.kind == CompressorKind::Identity) return 0.0;
  const std::size_t k = spec.resolve(dim);
  return 1.0 - static_cast<double>(k) / static_cast<double>(dim);
}

struct PayloadEntry {
  std::uint32_t index;
  double value;
  bool operator==(const PayloadEntry&) const = default;
};

/// What a client puts on the wire: sparse (index, value) pairs in strictly
/// increasing index order, or every coordinate when `dense` is set.
struct SparsePayload {
  std::vector<PayloadEntry> entries;
  std::size_t dim = 0;
  bool dense = false;

  [[nodiscard]] ParamVector densify() const {
    ParamVector out(dim);
    for (const auto& e : entries) out[e.index] = e.value;
    return out;
  }

  // Adds the payload into `acc` without materializing the dense vector.
  void accumulate_into(ParamVector& acc, double weight = 1.0) const {
    if (acc.size() != dim) throw DimensionError("SparsePayload::accumulate_into: dimension mismatch");
    for (const auto& e : entries) acc[e.index] += weight * e.value;
  }

  bool operator==(const SparsePayload&) const = default;
};

inline SparsePayload dense_payload(const ParamVector& x) {
  if (x.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("payload: dimension exceeds 32-bit index range");
  }
  SparsePayload p;
  p.dim = x.size();
  p.dense = true;
  p.entries.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    p.entries.push_back({static_cast<std::uint32_t>(i), x[i]});
  }
  return p;
}

// Sparse uplink: 8 bytes per retained element (value + index).
// Dense payloads: 4 bytes per coordinate.
inline std::uint64_t payload_bytes(const SparsePayload& payload) {
  if (payload.dense) return 4ULL * payload.dim;
  return 8ULL * payload.entries.size();
}

struct Compressed {
  SparsePayload payload;
  ParamVector dense;  // C(x)
};

namespace detail {

inline Compressed keep_indices(const ParamVector& x, std::vector<std::size_t> idx) {
  std::sort(idx.begin(), idx.end());
  Compressed out{SparsePayload{{}, x.size(), false}, ParamVector(x.size())};
  out.payload.entries.reserve(idx.size());
  for (std::size_t i : idx) {
    out.payload.entries.push_back({static_cast<std::uint32_t>(i), x[i]});
    out.dense[i] = x[i];
  }
  return out;
}

}  // namespace detail

/// Applies C(.) to x.
///
/// Identity sends x densely. TopK keeps the k largest magnitudes, lowest index
/// first on ties. RandK keeps k distinct uniformly drawn coordinates with no
/// rescaling, so it stays contractive (and biased). `rng` is only read by RandK.
inline Compressed compress(const CompressorSpec& spec, const ParamVector& x, RngStream* rng) {
  x.check_finite("compress");
  if (x.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw DomainError("compress: dimension exceeds 32-bit index range");
  }
  const std::size_t p = x.size();
  const std::size_t k = spec.resolve(p);
  switch (spec.kind) {
    case CompressorKind::Identity:
      return {dense_payload(x), x};
    case CompressorKind::TopK: {
      std::vector<std::size_t> order(p);
      std::iota(order.begin(), order.end(), std::size_t{0});
      auto by_magnitude = [&x](std::size_t a, std::size_t b) {
        const double ma = std::abs(x[a]);
        const double mb = std::abs(x[b]);
        return ma != mb ? ma > mb : a < b;
      };
      std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                       order.end(), by_magnitude);
      order.resize(k);
      return detail::keep_indices(x, std::move(order));
    }
    case CompressorKind::RandK: {
      if (rng == nullptr) throw DomainError("compress: RandK requires a random stream");
      // Partial Fisher-Yates over the index set.
      std::vector<std::size_t> pool(p);
      std::iota(pool.begin(), pool.end(), std::size_t{0});
      for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + rng->index(p - i);
        std::swap(pool[i], pool[j]);
      }
      pool.resize(k);
      return detail::keep_indices(x, std::move(pool));
    }
  }
  throw DomainError("compress: unknown compressor kind");
}

// ---------------------------------------------------------------------------
// Canonical wire form:
//   u64 dim | u8 dense | u64 entry count | entries
// with sparse entries as (u32 index, f32 value) pairs and dense payloads as
// dim f32 values. All integers little-endian. Values are rounded to single
// precision here only; the in-memory payload keeps doubles.
// ---------------------------------------------------------------------------

namespace detail {

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t b = 0; b < sizeof(T); ++b) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * b)) & 0xFF));
  }
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw DomainError("deserialize_payload: truncated input");
  T v = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) v |= static_cast<T>(in[pos + b]) << (8 * b);
  pos += sizeof(T);
  return v;
}

}  // namespace detail

inline constexpr std::size_t kPayloadHeaderBytes = 8 + 1 + 8;

inline std::vector<std::uint8_t> serialize_payload(const SparsePayload& payload) {
  std::vector<std::uint8_t> out;
  out.reserve(kPayloadHeaderBytes + payload_bytes(payload));
  detail::put_le<std::uint64_t>(out, payload.dim);
  out.push_back(payload.dense ? 1 : 0);
  detail::put_le<std::uint64_t>(out, payload.entries.size());
  for (const auto& e : payload.entries) {
    if (!payload.dense) detail::put_le<std::uint32_t>(out, e.index);
    detail::put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(e.value)));
  }
  return out;
}

inline SparsePayload deserialize_payload(std::span<const std::uint8_t> in) {
  std::size_t pos = 0;
  SparsePayload p;
  p.dim = detail::get_le<std::uint64_t>(in, pos);
  if (pos >= in.size()) throw DomainError("deserialize_payload: truncated input");
  p.dense = in[pos++] != 0;
  const auto count = detail::get_le<std::uint64_t>(in, pos);
  if (count > p.dim) throw DomainError("deserialize_payload: more entries than dimension");
  p.entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint32_t index =
        p.dense ? static_cast<std::uint32_t>(i) : detail::get_le<std::uint32_t>(in, pos);
    const float value = std::bit_cast<float>(detail::get_le<std::uint32_t>(in, pos));
    if (index >= p.dim || (!p.entries.empty() && index <= p.entries.back().index)) {
      throw DomainError("deserialize_payload: indices must be strictly increasing and < dim");
    }
    p.entries.push_back({index, static_cast<double>(value)});
  }
  if (pos != in.size()) throw DomainError("deserialize_payload: trailing bytes");
  return p;
}

}  // namespace fedcef
