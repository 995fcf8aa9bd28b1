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
#include <limits>
#include <map>
#include <vector>

#include <gtest/gtest.h>

#include "shuffle_sco/divergence.h"
#include "shuffle_sco/rng.h"

namespace shuffle_sco {
namespace {

// max over every subset Z with P(Z) >= delta of log((P(Z) - delta) / Q(Z)).
double BruteForceDivergence(const FiniteDistribution& p,
                            const FiniteDistribution& q, double delta) {
  std::map<std::int64_t, std::pair<double, double>> merged;
  for (std::size_t i = 0; i < p.size(); ++i) {
    merged[p.support()[i]].first += p.probabilities()[i];
  }
  for (std::size_t i = 0; i < q.size(); ++i) {
    merged[q.support()[i]].second += q.probabilities()[i];
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [k, v] : merged) pts.push_back(v);
  const std::size_t m = pts.size();
  double best = -std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    long double pz = 0.0L;
    long double qz = 0.0L;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask >> i & 1) {
        pz += pts[i].first;
        qz += pts[i].second;
      }
    }
    if (pz < delta) continue;
    const long double excess = pz - delta;
    if (excess <= 0) continue;
    if (qz == 0) return std::numeric_limits<double>::infinity();
    best = std::max(best, static_cast<double>(std::log(excess / qz)));
  }
  return best;
}

FiniteDistribution RandomDistribution(SeededRng& rng, int size,
                                      std::int64_t lo, double zero_prob) {
  std::vector<std::int64_t> support;
  std::vector<double> probs;
  std::int64_t at = lo;
  double total = 0.0;
  for (int i = 0; i < size; ++i) {
    at += 1 + static_cast<std::int64_t>(rng.UniformIndex(2));
    support.push_back(at);
    const double w = rng.Bernoulli(zero_prob) ? 0.0 : rng.Uniform() + 1e-3;
    probs.push_back(w);
    total += w;
  }
  if (total == 0.0) {
    probs[0] = 1.0;
    total = 1.0;
  }
  for (double& w : probs) w /= total;
  return FiniteDistribution(support, probs);
}

TEST(FiniteDistribution, ValidatesInvariants) {
  EXPECT_THROW(FiniteDistribution({0, 0}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution({1, 0}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution({0, 1}, {1.5, -0.5}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution({0, 1}, {0.5, 0.49}), std::invalid_argument);
  EXPECT_THROW(FiniteDistribution({0}, {0.5, 0.5}), std::invalid_argument);
  EXPECT_NO_THROW(FiniteDistribution({0, 3}, {0.25, 0.75}));
}

TEST(FiniteDistribution, BinomialMatchesProductFormula) {
  const std::uint64_t m = 30;
  const double p = 0.37;
  const FiniteDistribution bin = FiniteDistribution::Binomial(m, p);
  long double choose = 1.0L;
  for (std::uint64_t k = 0; k <= m; ++k) {
    if (k > 0) choose = choose * (m - k + 1) / k;
    const long double pmf =
        choose * std::pow(static_cast<long double>(p), k) *
        std::pow(static_cast<long double>(1 - p), m - k);
    EXPECT_NEAR(bin.Mass(static_cast<std::int64_t>(k)), static_cast<double>(pmf),
                1e-15);
  }
  EXPECT_NEAR(bin.Mean(), m * p, 1e-12);
  EXPECT_NEAR(bin.Variance(), m * p * (1 - p), 1e-11);
}

TEST(FiniteDistribution, ConvolveMatchesDoubleSum) {
  SeededRng rng(3);
  const FiniteDistribution a = RandomDistribution(rng, 6, -3, 0.2);
  const FiniteDistribution b = RandomDistribution(rng, 5, 4, 0.2);
  std::map<std::int64_t, double> oracle;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      oracle[a.support()[i] + b.support()[j]] +=
          a.probabilities()[i] * b.probabilities()[j];
    }
  }
  const FiniteDistribution c = a.Convolve(b);
  for (const auto& [k, v] : oracle) EXPECT_NEAR(c.Mass(k), v, 1e-15);
}

TEST(FiniteDistribution, ShiftMovesSupport) {
  const FiniteDistribution a = FiniteDistribution::Binomial(4, 0.5).Shifted(3);
  EXPECT_EQ(a.support().front(), 3);
  EXPECT_DOUBLE_EQ(a.Mass(5), 6.0 / 16.0);
  EXPECT_DOUBLE_EQ(a.Mass(2), 0.0);
}

TEST(LogBinomialPmf, OutsideSupportIsMinusInfinity) {
  EXPECT_EQ(LogBinomialPmf(5, 0.3, -1), -std::numeric_limits<double>::infinity());
  EXPECT_EQ(LogBinomialPmf(5, 0.3, 6), -std::numeric_limits<double>::infinity());
  EXPECT_NEAR(LogBinomialPmf(5, 0.3, 2), std::log(10 * 0.09 * 0.343), 1e-13);
}

TEST(ApproxMaxDivergence, IdenticalDistributionsAtZeroDelta) {
  const FiniteDistribution b = FiniteDistribution::Binomial(12, 0.4);
  EXPECT_NEAR(ApproxMaxDivergence(b, b, 0.0), 0.0, 1e-12);
}

TEST(ApproxMaxDivergence, DisjointPointMassesAreInfinite) {
  EXPECT_EQ(ApproxMaxDivergence(FiniteDistribution::PointMass(0),
                                FiniteDistribution::PointMass(1), 0.5),
            std::numeric_limits<double>::infinity());
}

TEST(ApproxMaxDivergence, NegativeDeltaThrows) {
  const FiniteDistribution b = FiniteDistribution::Binomial(3, 0.4);
  EXPECT_THROW(ApproxMaxDivergence(b, b, -0.1), std::invalid_argument);
}

TEST(ApproxMaxDivergence, DeltaOneLeavesNoQualifyingSet) {
  const FiniteDistribution b = FiniteDistribution::Binomial(3, 0.4);
  EXPECT_EQ(ApproxMaxDivergence(b, b, 1.0),
            -std::numeric_limits<double>::infinity());
}

TEST(ApproxMaxDivergence, ShiftedBinomialMatchesExhaustiveSubsets) {
  // Bin(10, 1/2) + 1 against Bin(10, 1/2), truncated to 12 common points.
  const FiniteDistribution base = FiniteDistribution::Binomial(10, 0.5);
  std::vector<std::int64_t> support;
  std::vector<double> p_mass;
  std::vector<double> q_mass;
  for (std::int64_t k = 0; k <= 11; ++k) {
    support.push_back(k);
    p_mass.push_back(base.Mass(k - 1));
    q_mass.push_back(base.Mass(k));
  }
  const FiniteDistribution p(support, p_mass);
  const FiniteDistribution q(support, q_mass);
  const double sorted = ApproxMaxDivergence(p, q, 0.01);
  EXPECT_TRUE(std::isfinite(sorted));
  EXPECT_NEAR(sorted, BruteForceDivergence(p, q, 0.01), 1e-12);
}

TEST(ApproxMaxDivergence, RandomPairsMatchExhaustiveSubsets) {
  SeededRng rng(17);
  for (int trial = 0; trial < 300; ++trial) {
    const int a = 1 + static_cast<int>(rng.UniformIndex(8));
    const int b = 1 + static_cast<int>(rng.UniformIndex(8));
    const FiniteDistribution p = RandomDistribution(rng, a, 0, 0.25);
    const FiniteDistribution q = RandomDistribution(rng, b, 0, 0.25);
    const double delta = trial % 5 == 0 ? 0.0 : 0.3 * rng.Uniform();
    const double fast = ApproxMaxDivergence(p, q, delta);
    const double slow = BruteForceDivergence(p, q, delta);
    if (std::isinf(slow)) {
      ASSERT_EQ(fast, slow) << "trial " << trial;
    } else {
      ASSERT_NEAR(fast, slow, 1e-11) << "trial " << trial;
    }
  }
}

}  // namespace
}  // namespace shuffle_sco
