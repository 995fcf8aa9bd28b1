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

#ifndef SHUFFLE_SCO_VECTOR_SUM_H_
#define SHUFFLE_SCO_VECTOR_SUM_H_

#include <cstdint>
#include <span>
#include <vector>

#include "shuffle_sco/accountant.h"
#include "shuffle_sco/core.h"
#include "shuffle_sco/rng.h"
#include "shuffle_sco/scalar_sum.h"

namespace shuffle_sco {

// One shuffled view per coordinate.
struct VectorSumReport {
  std::vector<ShuffledView> views;
};

// Per-coordinate 1-message counts for a user holding x. Throws when
// |x|_2 > l2_cap (1e-9 relative slack) or on dimension mismatch.
std::vector<std::uint64_t> RandomizeVector(const Vec& x,
                                           const VectorSumParams& params,
                                           SeededRng& rng);

VectorSumReport RunVectorSum(std::span<const Vec> xs,
                             const VectorSumParams& params, SeededRng& rng,
                             NoiseMode mode = NoiseMode::kPerUser);

// o_j = AnalyzeScalar(view_j) - users * l2_cap.
Vec AnalyzeVector(const VectorSumReport& report, const VectorSumParams& params);

// Exact variance of each output coordinate.
Vec CoordinateVariances(std::span<const Vec> xs, const VectorSumParams& params);

// Exact E|o - sum x|^2: the sum of per-coordinate analytic variances.
double VectorSumVariance(std::span<const Vec> xs,
                         const VectorSumParams& params);

// Per-coordinate variance bound (Delta/g)^2 users (1/4 + b p (1 - p)),
// valid for any feasible inputs.
double WorstCaseCoordinateVariance(const VectorSumParams& params,
                                   std::uint64_t users);

// Frozen constant C of the total variance bound
//   C d Delta_2^2 ln^2((d + 1) / delta) / eps^2,
// valid for Delta_2 >= 1.
inline constexpr double kVectorVarianceConstant = 1.8e5;

double VectorVarianceBound(const VectorSumParams& params);

struct VectorSumCertificate {
  std::vector<double> eps_per_coord;
  double sum_squares = 0.0;
  PrivacyBudget composed;
  bool squares_within_bound = false;  // sum eps_j^2 <= 9 eps_hat^2
  bool within_budget = false;         // composed eps <= eps, delta <= delta
};

// eps_j = eps_hat (2/g + a_j / (2 Delta_2)) composed with slack gamma. Throws
// unless the datasets are norm-feasible neighbors.
VectorSumCertificate PrivacyCertificate(std::span<const Vec> x,
                                        std::span<const Vec> x_prime,
                                        const VectorSumParams& params);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_VECTOR_SUM_H_
