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

#ifndef SHUFFLE_SCO_SCALAR_SUM_H_
#define SHUFFLE_SCO_SCALAR_SUM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "shuffle_sco/accountant.h"
#include "shuffle_sco/divergence.h"
#include "shuffle_sco/rng.h"

namespace shuffle_sco {

// How the analyzer-visible noise is generated. kPerUser draws Bin(b, p) for
// every user; kPooled draws one Bin(b * users, p), which has the same law.
enum class NoiseMode { kPerUser, kPooled };

// Sufficient statistic of the shuffler output. `bits` is only populated by
// ShuffleExplicit.
struct ShuffledView {
  std::uint64_t ones_count = 0;
  std::uint64_t total_messages = 0;
  std::uint64_t users = 0;
  std::vector<std::uint8_t> bits;
};

// floor(x g / Delta) + Ber(x g / Delta - floor(x g / Delta)).
std::uint64_t EncodeFixedPoint(double x, const ScalarSumParams& params,
                               SeededRng& rng);

// Number of 1-messages a user with value x sends: fixed-point encoding plus
// Bin(b, p). Throws when x is outside [0, Delta].
std::uint64_t RandomizeScalar(double x, const ScalarSumParams& params,
                              SeededRng& rng);

ShuffledView Shuffle(std::span<const std::uint64_t> contributions,
                     const ScalarSumParams& params);

// Materializes every message bit and applies a uniformly random permutation.
// Intended for tiny instances only.
ShuffledView ShuffleExplicit(std::span<const std::uint64_t> contributions,
                             const ScalarSumParams& params, SeededRng& rng);

// (Delta / g)(ones - p b users).
double AnalyzeScalar(const ShuffledView& view, const ScalarSumParams& params);

// Randomize every user, shuffle, return the view.
ShuffledView RunScalarSum(std::span<const double> xs,
                          const ScalarSumParams& params, SeededRng& rng,
                          NoiseMode mode = NoiseMode::kPerUser);

// Exact variance (Delta/g)^2 sum_i [mu_i (1 - mu_i) + b p (1 - p)] with mu_i the
// fractional part of x_i g / Delta.
double AnalyticVariance(std::span<const double> xs,
                        const ScalarSumParams& params);

// Frozen constant C of the variance bound C Delta^2 ln(2/delta) / eps^2.
inline constexpr double kVarianceBoundConstant = 200.0;

double VarianceBound(const ScalarSumParams& params);

inline constexpr std::uint64_t kMaxExactSupport = 200000;

// Exact law of ones_count. Throws when the support exceeds kMaxExactSupport.
FiniteDistribution ExactOutputDistribution(std::span<const double> xs,
                                           const ScalarSumParams& params);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_SCALAR_SUM_H_
