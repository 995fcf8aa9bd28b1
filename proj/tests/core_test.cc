// Copyright 2026 The Shuffle SCO Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <set>
#include <vector>

#include <gtest/gtest.h>

#include "shuffle_sco/core.h"
#include "shuffle_sco/rng.h"

namespace shuffle_sco {
namespace {

TEST(ParameterSpace, RejectsDegenerateShapes) {
  EXPECT_THROW(Ball(Vec(), 1.0), std::invalid_argument);
  EXPECT_THROW(Ball::Centered(2, 0.0), std::invalid_argument);
  EXPECT_THROW(Ball::Centered(2, -1.0), std::invalid_argument);
  const Ball b = Ball::Centered(3, 2.0);
  EXPECT_EQ(b.dim(), 3);
  EXPECT_DOUBLE_EQ(b.diameter(), 4.0);
}

TEST(ProjectToBall, InteriorPointsAreUnchanged) {
  const Ball b = Ball::Centered(2, 1.0);
  Vec v(2);
  v << 0.3, -0.4;
  EXPECT_EQ(ProjectToBall(v, b), v);
}

TEST(ProjectToBall, ExteriorPointsLandOnTheBoundaryAlongTheRay) {
  Vec c(2);
  c << 1.0, 1.0;
  const Ball b(c, 2.0);
  Vec v(2);
  v << 7.0, 9.0;  // offset (6, 8), norm 10
  const Vec p = ProjectToBall(v, b);
  EXPECT_NEAR(p[0], 1.0 + 1.2, 1e-15);
  EXPECT_NEAR(p[1], 1.0 + 1.6, 1e-15);
  EXPECT_TRUE(b.Contains(p));
}

TEST(ProjectToBall, AlwaysFeasibleAndIdempotent) {
  SeededRng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double r = 0.1 + 10 * rng.Uniform();
    const Ball b = Ball::Centered(5, r);
    Vec v(5);
    for (int j = 0; j < 5; ++j) v[j] = rng.Gaussian(3 * r);
    const Vec p = ProjectToBall(v, b);
    ASSERT_LE(p.norm(), r);
    ASSERT_EQ(ProjectToBall(p, b), p);
  }
}

TEST(ProjectToBall, DimensionMismatchThrows) {
  EXPECT_THROW(ProjectToBall(Vec::Zero(3), Ball::Centered(2, 1.0)),
               std::invalid_argument);
}

TEST(L2DistanceOfSums, HandComputed) {
  std::vector<Vec> x = {Vec::Constant(2, 1.0), Vec::Constant(2, 2.0)};
  std::vector<Vec> y = x;
  y[1] << 5.0, 6.0;  // sums differ by (-3, -4)
  EXPECT_DOUBLE_EQ(L2DistanceOfSums<double>(x, y), 5.0);
  y.pop_back();
  EXPECT_THROW(L2DistanceOfSums<double>(x, y), std::invalid_argument);
}

TEST(NeighborIndex, FindsTheSingleDifference) {
  std::vector<Vec> x = {Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)};
  std::vector<Vec> y = x;
  EXPECT_EQ(NeighborIndex<double>(x, y), -1);
  y[2][1] = 0.5;
  EXPECT_EQ(NeighborIndex<double>(x, y), 2);
  y[0][0] = 0.5;
  EXPECT_THROW(NeighborIndex<double>(x, y), std::invalid_argument);
}

TEST(RequireValidBudget, Ranges) {
  EXPECT_NO_THROW(RequireValidBudget({1.0, 1e-5}));
  EXPECT_THROW(RequireValidBudget({0.0, 1e-5}), std::invalid_argument);
  EXPECT_THROW(RequireValidBudget({1.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(RequireValidBudget({1.0, 0.5}), std::invalid_argument);
  EXPECT_THROW(RequireValidBudget({INFINITY, 0.1}), std::invalid_argument);
}

TEST(SeededRng, EqualSeedsGiveEqualSequences) {
  SeededRng a(42, 7);
  SeededRng b(42, 7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
  EXPECT_EQ(a.Binomial(1000, 0.3), b.Binomial(1000, 0.3));
  EXPECT_EQ(a.Gaussian(2.0), b.Gaussian(2.0));
}

TEST(SeededRng, StreamsAndChildrenAreDistinct) {
  std::set<std::uint64_t> first;
  for (std::uint64_t s = 0; s < 64; ++s) {
    first.insert(SeededRng(1, s)());
    first.insert(SeededRng(s + 2, 0)());
  }
  EXPECT_EQ(first.size(), 128u);
  const SeededRng p(3, 4);
  const SeededRng q(3, 5);
  EXPECT_NE(p.Child(0)(), q.Child(0)());
  EXPECT_NE(p.Child(0)(), p.Child(1)());
}

TEST(SeededRng, DegenerateDraws) {
  SeededRng rng(5);
  EXPECT_FALSE(rng.Bernoulli(0.0));
  EXPECT_TRUE(rng.Bernoulli(1.0));
  EXPECT_EQ(rng.Binomial(0, 0.4), 0u);
  EXPECT_EQ(rng.Binomial(17, 0.0), 0u);
  EXPECT_EQ(rng.Binomial(17, 1.0), 17u);
  EXPECT_EQ(rng.Gaussian(0.0), 0.0);
  EXPECT_THROW(rng.UniformIndex(0), std::invalid_argument);
}

TEST(SeededRng, BinomialMomentsMatch) {
  SeededRng rng(9);
  const std::uint64_t m = 200;
  const double p = 0.3;
  const int draws = 200000;
  double sum = 0.0;
  double sq = 0.0;
  for (int i = 0; i < draws; ++i) {
    const double k = static_cast<double>(rng.Binomial(m, p));
    sum += k;
    sq += k * k;
  }
  const double mean = sum / draws;
  const double var = sq / draws - mean * mean;
  const double true_var = m * p * (1 - p);
  EXPECT_NEAR(mean, m * p, 5 * std::sqrt(true_var / draws));
  EXPECT_NEAR(var / true_var, 1.0, 0.02);
}

TEST(SeededRng, UniformIndexCoversRange) {
  SeededRng rng(13);
  std::vector<int> hits(7, 0);
  for (int i = 0; i < 70000; ++i) ++hits[rng.UniformIndex(7)];
  for (int h : hits) EXPECT_NEAR(h, 10000, 500);
}

}  // namespace
}  // namespace shuffle_sco
