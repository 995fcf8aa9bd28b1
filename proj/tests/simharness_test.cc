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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "shuffle_sco/accountant.h"
#include "shuffle_sco/divergence.h"
#include "shuffle_sco/optimize.h"
#include "shuffle_sco/robust.h"
#include "shuffle_sco/synth.h"
#include "shuffle_sco/transcript.h"

namespace shuffle_sco {
namespace {

TEST(AllocateUsers, SequentialBlocks) {
  const std::vector<std::uint64_t> sizes{3, 4, 2};
  const auto r = AllocateUsers(10, Interactivity::kSequential, sizes);
  EXPECT_EQ(r, (std::vector<UserRange>{{0, 3}, {3, 7}, {7, 9}}));
  const std::vector<std::uint64_t> too_many{6, 5};
  EXPECT_THROW(AllocateUsers(10, Interactivity::kSequential, too_many),
               std::invalid_argument);
  const std::vector<std::uint64_t> exact{5, 5};
  EXPECT_EQ(AllocateUsers(10, Interactivity::kSequential, exact).back(),
            (UserRange{5, 10}));
}

TEST(AllocateUsers, FullEveryoneEachRound) {
  const std::vector<std::uint64_t> sizes{10, 10, 10};
  const auto r = AllocateUsers(10, Interactivity::kFull, sizes);
  ASSERT_EQ(r.size(), 3u);
  for (const UserRange& u : r) EXPECT_EQ(u, (UserRange{0, 10}));
}

TEST(Transcript, DisjointnessPredicate) {
  Transcript t;
  t.rounds.resize(2);
  t.rounds[0].users = {0, 5};
  t.rounds[1].users = {5, 9};
  EXPECT_TRUE(t.SequentiallyDisjoint());
  t.rounds[1].users = {4, 9};
  EXPECT_FALSE(t.SequentiallyDisjoint());
  t.rounds[0].users = {6, 8};
  t.rounds[1].users = {0, 6};
  EXPECT_TRUE(t.SequentiallyDisjoint());
}

TEST(Transcript, JsonRoundTripIsExact) {
  const QuadraticLoss loss(3.0);
  const Ball ball = Ball::Centered(2, 1.0);
  SeededRng rng(1);
  const Dataset data = SynthData(LossKind::kQuadratic, 600, 2, rng).data;
  Transcript tr;
  RunOptions opts;
  opts.seed = 3;
  opts.transcript = &tr;
  RunSgd(loss, data, {1.0, 1e-5}, ball, opts);
  ASSERT_FALSE(tr.rounds.empty());
  const Transcript back = TranscriptFromJson(TranscriptToJson(tr));
  ASSERT_EQ(back.rounds.size(), tr.rounds.size());
  EXPECT_EQ(back.mode, tr.mode);
  for (std::size_t i = 0; i < tr.rounds.size(); ++i) {
    const RoundRecord& a = tr.rounds[i];
    const RoundRecord& b = back.rounds[i];
    EXPECT_EQ(a.round, b.round);
    EXPECT_EQ(a.users, b.users);
    EXPECT_EQ(a.randomizer, b.randomizer);
    EXPECT_EQ(a.noise_mode, b.noise_mode);
    EXPECT_EQ(a.params.p, b.params.p);
    EXPECT_EQ(a.params.trials, b.params.trials);
    EXPECT_EQ(a.params.grain, b.params.grain);
    EXPECT_EQ(a.params.range, b.params.range);
    EXPECT_EQ(a.dim, b.dim);
    EXPECT_EQ(a.l2_cap, b.l2_cap);
    EXPECT_EQ(a.ones_counts, b.ones_counts);
    EXPECT_EQ(a.seed, b.seed);
    EXPECT_EQ(a.stream, b.stream);
    EXPECT_EQ(a.query_point, b.query_point);
  }
  // A replay from the parsed transcript reproduces every view.
  for (const RoundRecord& r : back.rounds) {
    EXPECT_EQ(ReplayRound(loss, data, r).ones_counts, r.ones_counts);
  }
  EXPECT_THROW(TranscriptFromJson("{not json"), std::exception);
}

TEST(HonestSubset, SizesAndValidation) {
  EXPECT_EQ(MinimumHonest(9, 1.0 / 3.0), 3u);
  EXPECT_EQ(MinimumHonest(10, 0.5), 5u);
  EXPECT_EQ(MinimumHonest(10, 0.55), 6u);
  EXPECT_EQ(MinimumHonest(7, 1.0), 7u);
  EXPECT_THROW(MinimumHonest(10, 0.3), std::invalid_argument);
  EXPECT_THROW(MinimumHonest(10, 1.01), std::invalid_argument);

  const HonestSubset p = HonestSubset::Prefix(10, 0.5);
  EXPECT_EQ(p.honest, (std::vector<std::uint64_t>{0, 1, 2, 3, 4}));
  SeededRng rng(2);
  const HonestSubset s = HonestSubset::Sample(100, 0.4, rng);
  EXPECT_EQ(s.honest.size(), 40u);
  EXPECT_NO_THROW(ValidateHonestSubset(s, 100));

  HonestSubset bad = p;
  bad.honest = {0, 2, 2, 3, 4};
  EXPECT_THROW(ValidateHonestSubset(bad, 10), std::invalid_argument);
  bad.honest = {0, 1, 2, 3};
  EXPECT_THROW(ValidateHonestSubset(bad, 10), std::invalid_argument);
  bad.honest = {0, 1, 2, 3, 10};
  EXPECT_THROW(ValidateHonestSubset(bad, 10), std::invalid_argument);
}

TEST(Dropouts, FullHonestyIsTheStandardProtocol) {
  const ScalarSumParams params =
      SelectScalarSumParams(50, 1.0, {1.0, 1e-5});
  std::vector<double> xs(50);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = 0.02 * i;
  for (NoiseMode mode : {NoiseMode::kPerUser, NoiseMode::kPooled}) {
    SeededRng a(7, 3);
    SeededRng b(7, 3);
    const RobustScalarResult r = RunScalarWithDropouts(
        xs, params, HonestSubset::Prefix(50, 1.0), a, mode);
    const ShuffledView v = RunScalarSum(xs, params, b, mode);
    EXPECT_EQ(r.view.ones_count, v.ones_count);
    EXPECT_EQ(r.estimate, AnalyzeScalar(v, params));
  }
}

TEST(Dropouts, UnbiasedForHonestSum) {
  const ScalarSumParams params = SelectScalarSumParams(40, 1.0, {1.0, 0.01});
  std::vector<double> xs(40);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = std::fmod(0.37 * i, 1.0);
  SeededRng pick(4);
  const HonestSubset honest = HonestSubset::Sample(40, 0.5, pick);
  double truth = 0.0;
  std::vector<double> kept;
  for (std::uint64_t i : honest.honest) {
    truth += xs[i];
    kept.push_back(xs[i]);
  }
  const int trials = 100000;
  double mean = 0.0;
  SeededRng rng(5);
  for (int t = 0; t < trials; ++t) {
    mean += RunScalarWithDropouts(xs, params, honest, rng,
                                  NoiseMode::kPooled).estimate /
            trials;
  }
  const double sd = std::sqrt(AnalyticVariance(kept, params) / trials);
  EXPECT_LT(std::abs(mean - truth), 4.0 * sd);
}

TEST(Dropouts, EnumeratedDivergenceWithinScaledBound) {
  const PrivacyBudget budget{1.0, 0.05};
  for (std::uint64_t g : {3u, 4u}) {
    const std::uint64_t n = 3;
    const ScalarSumParams params =
        SelectScalarSumParamsWithGrain(n, 1.0, g, budget);
    const HonestSubset honest = HonestSubset::Prefix(n, 0.5);
    ASSERT_EQ(honest.honest.size(), 2u);
    const std::vector<double> x{0.1, 0.6};
    const std::vector<double> x_prime{0.9, 0.6};
    const FiniteDistribution p = ExactOutputDistribution(x, params);
    const FiniteDistribution q = ExactOutputDistribution(x_prime, params);
    const double div = std::max(ApproxMaxDivergence(p, q, budget.delta),
                                ApproxMaxDivergence(q, p, budget.delta));
    EXPECT_LE(div, RobustScalarSumBound(params, 0.5, 0.8)) << "g=" << g;
  }
  const ScalarSumParams params = SelectScalarSumParams(4, 1.0, {1.0, 0.05});
  EXPECT_THROW(RobustScalarSumBound(params, 0.3, 0.5), std::invalid_argument);
  const std::vector<double> xs{0.1, 0.2, 0.3, 0.4};
  SeededRng rng(1);
  HonestSubset low = HonestSubset::Prefix(4, 0.5);
  low.gamma = 0.25;
  EXPECT_THROW(RunScalarWithDropouts(xs, params, low, rng),
               std::invalid_argument);
}

TEST(Dropouts, VectorCertificateScales) {
  const VectorSumParams params = SelectVectorSumParams(20, 3, 1.0, {1.0, 1e-5});
  std::vector<Vec> x(20, Vec::Constant(3, 0.1));
  std::vector<Vec> x_prime = x;
  x_prime[4] = Vec::Constant(3, -0.5);
  const VectorSumCertificate full = PrivacyCertificate(x, x_prime, params);
  const VectorSumCertificate half =
      RobustVectorCertificate(x, x_prime, params, 0.5);
  ASSERT_EQ(half.eps_per_coord.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_DOUBLE_EQ(half.eps_per_coord[j], 2.0 * full.eps_per_coord[j]);
  }
  EXPECT_TRUE(half.squares_within_bound);
  EXPECT_TRUE(half.within_budget);
}

TEST(Dropouts, VectorEstimateUsesHonestUsersOnly) {
  VectorSumParams params = SelectVectorSumParams(6, 2, 1.0, {1.0, 1e-5});
  params.per_coord.trials = 0;
  std::vector<Vec> xs(6, Vec::Zero(2));
  xs[0] << 1.0, 0.0;
  xs[1] << 0.0, -1.0;
  xs[5] << 1.0, 0.0;
  SeededRng rng(2);
  const RobustVectorResult r = RunVectorWithDropouts(
      xs, params, HonestSubset::Prefix(6, 0.5), rng);
  const double grain = static_cast<double>(params.per_coord.grain);
  EXPECT_NEAR(r.estimate[0], 1.0, 3 * 2.0 / grain);
  EXPECT_NEAR(r.estimate[1], -1.0, 3 * 2.0 / grain);
}

}  // namespace
}  // namespace shuffle_sco
