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

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "fedcef/core/error.hpp"
#include "fedcef/core/param_vector.hpp"
#include "fedcef/core/rng.hpp"

namespace fedcef {
namespace {

TEST(ParamVector, AddIsComponentwise) {
  EXPECT_EQ(add(ParamVector{1, 2}, ParamVector{3, 4}), (ParamVector{4, 6}));
}

TEST(ParamVector, ScaleByZeroAnnihilates) {
  EXPECT_EQ(scale(ParamVector{1, -2}, 0.0), (ParamVector{0, 0}));
}

TEST(ParamVector, SqNormPythagorean) {
  EXPECT_DOUBLE_EQ(sq_norm(ParamVector{3, 4}), 25.0);
  EXPECT_DOUBLE_EQ(norm(ParamVector{3, 4}), 5.0);
}

TEST(ParamVector, RemainingOps) {
  const ParamVector a{1, -2, 3};
  const ParamVector b{4, 0, -1};
  EXPECT_EQ(subtract(a, b), (ParamVector{-3, -2, 4}));
  EXPECT_EQ(axpy(a, 2.0, b), (ParamVector{9, -2, 1}));
  EXPECT_DOUBLE_EQ(dot(a, b), 1.0);
  EXPECT_DOUBLE_EQ(inf_norm(a), 3.0);
  EXPECT_DOUBLE_EQ(l1_norm(a), 6.0);
  EXPECT_EQ(count_nonzero(b), 2u);
  EXPECT_DOUBLE_EQ(inf_distance(a, b), 4.0);
  ParamVector y = a;
  axpy_inplace(y, -1.0, a);
  EXPECT_EQ(y, ParamVector(3));
}

TEST(ParamVector, DimensionMismatchThrows) {
  EXPECT_THROW((void)add(ParamVector{1, 2}, ParamVector{1, 2, 3}), DimensionError);
  EXPECT_THROW((void)dot(ParamVector{1}, ParamVector{1, 2}), DimensionError);
  ParamVector y{1, 2};
  EXPECT_THROW(axpy_inplace(y, 1.0, ParamVector{1}), DimensionError);
}

TEST(ParamVector, NonFiniteResultNamesOperation) {
  const double big = std::numeric_limits<double>::max();
  try {
    (void)add(ParamVector{big}, ParamVector{big});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("add"), std::string::npos) << e.what();
  }
  try {
    (void)scale(ParamVector{big}, 10.0);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("scale"), std::string::npos) << e.what();
  }
  EXPECT_THROW((void)scale(ParamVector{1.0}, std::nan("")), NumericError);
  EXPECT_THROW(ParamVector({1.0, std::numeric_limits<double>::infinity()}), NumericError);
}

TEST(ParamVector, LeftToRightSumOrder) {
  // 1e16 + 1 - 1e16 is 0 left to right; a reordered sum would give 1.
  const ParamVector a{1e16, 1.0, -1e16};
  EXPECT_EQ(l1_norm(ParamVector{1.0, 1e-17, 1e-17}), 1.0);
  EXPECT_EQ(dot(a, ParamVector{1, 1, 1}), 0.0);
}

TEST(RngStream, SameSeedAndLabelReplays) {
  auto a = derive_stream(42, "a");
  auto b = derive_stream(42, "a");
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
}

TEST(RngStream, EmptyLabelRejected) { EXPECT_THROW(RngStream(1, ""), DomainError); }

TEST(RngStream, DistinctLabelsDiffer) {
  int same = 0;
  for (int i = 0; i < 1000; ++i) {
    auto a = derive_stream(42, "label/" + std::to_string(i) + "/a");
    auto b = derive_stream(42, "label/" + std::to_string(i) + "/b");
    if (a.next_u64() == b.next_u64()) ++same;
  }
  EXPECT_EQ(same, 0);
}

TEST(RngStream, DistinctSeedsDiffer) {
  int same = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto a = derive_stream(s, "a");
    auto b = derive_stream(s + 1, "a");
    if (a.next_u64() == b.next_u64()) ++same;
  }
  EXPECT_EQ(same, 0);
}

TEST(RngStream, DerivedLabelsCompose) {
  RngStream root(7, "client/3");
  auto d = root.derive("round/1");
  EXPECT_EQ(d.label(), "client/3/round/1");
  auto e = derive_stream(7, "client/3/round/1");
  EXPECT_EQ(d.next_u64(), e.next_u64());
}

TEST(RngStream, UniformMomentsRoughlyRight) {
  RngStream r(5, "moments");
  const int n = 200000;
  double s = 0.0;
  double s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform01();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  EXPECT_NEAR(s / n, 0.5, 0.005);
  EXPECT_NEAR(s2 / n - (s / n) * (s / n), 1.0 / 12.0, 0.002);
}

TEST(RngStream, IndexCoversRange) {
  RngStream r(9, "index");
  std::set<std::size_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto k = r.index(7);
    ASSERT_LT(k, 7u);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 7u);
}

// Known-answer check so a change to the keying scheme cannot slip by.
TEST(RngStream, KeyingIsStable) {
  auto a = derive_stream(42, "a");
  auto b = derive_stream(42, "a");
  const auto first = a.next_u64();
  EXPECT_EQ(first, b.next_u64());
  EXPECT_EQ(detail::fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(detail::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(detail::splitmix64(0), 0xe220a8397b1dcdafULL);
}

}  // namespace
}  // namespace fedcef
