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

#ifndef SHUFFLE_SCO_ROBUST_H_
#define SHUFFLE_SCO_ROBUST_H_

#include <cstdint>
#include <span>
#include <vector>

#include "shuffle_sco/accountant.h"
#include "shuffle_sco/core.h"
#include "shuffle_sco/rng.h"
#include "shuffle_sco/scalar_sum.h"
#include "shuffle_sco/vector_sum.h"

namespace shuffle_sco {

// Users that follow the protocol. The others are silent dropouts.
struct HonestSubset {
  double gamma = 1.0;
  std::vector<std::uint64_t> honest;  // strictly increasing

  // The first ceil(gamma n) users.
  static HonestSubset Prefix(std::uint64_t n, double gamma);
  // A uniformly random subset of ceil(gamma n) users.
  static HonestSubset Sample(std::uint64_t n, double gamma, SeededRng& rng);
};

std::uint64_t MinimumHonest(std::uint64_t n, double gamma);

// Throws unless gamma in [1/3, 1] and the subset is a valid, large enough
// index set for n users.
void ValidateHonestSubset(const HonestSubset& subset, std::uint64_t n);

struct RobustScalarResult {
  double estimate = 0.0;  // unbiased for the honest users' sum
  ShuffledView view;
  double divergence_bound = 0.0;  // worst case over gaps, (eps/gamma)(2/g + 1)
};

RobustScalarResult RunScalarWithDropouts(std::span<const double> xs,
                                         const ScalarSumParams& params,
                                         const HonestSubset& honest,
                                         SeededRng& rng,
                                         NoiseMode mode = NoiseMode::kPerUser);

struct RobustVectorResult {
  Vec estimate;
  VectorSumReport report;
};

RobustVectorResult RunVectorWithDropouts(std::span<const Vec> xs,
                                         const VectorSumParams& params,
                                         const HonestSubset& honest,
                                         SeededRng& rng,
                                         NoiseMode mode = NoiseMode::kPerUser);

// Vector certificate with each coordinate's epsilon scaled by 1/gamma.
VectorSumCertificate RobustVectorCertificate(std::span<const Vec> x,
                                             std::span<const Vec> x_prime,
                                             const VectorSumParams& params,
                                             double gamma_honest);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_ROBUST_H_
