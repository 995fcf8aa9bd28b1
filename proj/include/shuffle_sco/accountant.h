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

#ifndef SHUFFLE_SCO_ACCOUNTANT_H_
#define SHUFFLE_SCO_ACCOUNTANT_H_

#include <cstdint>
#include <utility>
#include <vector>

#include "shuffle_sco/core.h"
#include "shuffle_sco/divergence.h"

namespace shuffle_sco {

// Largest epsilon accepted by shuffle-sum parameter selection.
inline constexpr double kMaxShuffleSumEpsilon = 15.0;

// Fixed-point and noise configuration of the one-dimensional sum protocol.
struct ScalarSumParams {
  double range = 1.0;         // Delta, inputs live in [0, range]
  std::uint64_t grain = 1;    // g
  std::uint64_t trials = 0;   // b, noise trials per user
  double p = 0.0;             // noise bit probability, in (0, 1/2)
  std::uint64_t users = 1;    // n
  double epsilon = 0.0;       // budget the parameters were selected for
  double delta = 0.0;

  std::uint64_t MessagesPerUser() const { return grain + trials; }
};

// Per-coordinate split of a vector-sum budget. Coordinates share one set of
// scalar parameters with range 2 * l2_cap.
struct VectorSumParams {
  std::uint64_t dim = 1;
  double l2_cap = 1.0;
  std::uint64_t users = 1;
  ScalarSumParams per_coord;
  double eps_hat = 0.0;
  double delta_hat = 0.0;
  double gamma = 0.0;
  PrivacyBudget budget;
};

// Binomial mechanism f(X) + Bin(m, p).
struct BinomialMechBound {
  std::uint64_t m = 1;
  double p = 0.5;
  std::uint64_t t = 0;
  double alpha = 0.5;
  std::int64_t shift = 0;
};

struct CompositionInput {
  std::vector<PrivacyBudget> per_coordinate;
  double gamma = 0.0;
};

// eps = |shift| ln((1 + alpha) / (1 - alpha)), delta = 2 exp(-alpha^2 m p / 10).
// Throws unless m >= 1, p in (0, 1/2], alpha in (0, 1), |shift| <= t and
// alpha m p >= 2 t.
PrivacyBudget BinomialMechanismBudget(const BinomialMechBound& mech);

// g = ceil(Delta sqrt(n)), b = floor(180 g^2 ln(2/delta) / (eps^2 n)) + 1,
// p = 90 g^2 ln(2/delta) / (b eps^2 n).
ScalarSumParams SelectScalarSumParams(std::uint64_t n, double range,
                                      const PrivacyBudget& budget);

// As above with a caller-chosen grain; requires grain >= Delta sqrt(n).
ScalarSumParams SelectScalarSumParamsWithGrain(std::uint64_t n, double range,
                                               std::uint64_t grain,
                                               const PrivacyBudget& budget);

// g = ceil(max(2 Delta_2 sqrt(n), sqrt(d), 4)), gamma = delta_hat = delta/(d+1),
// eps_hat = eps / (18 sqrt(ln(1/gamma))). Guarantees d * delta_hat + gamma ==
// delta in floating point.
VectorSumParams SelectVectorSumParams(std::uint64_t n, std::uint64_t d,
                                      double l2_cap,
                                      const PrivacyBudget& budget);

// Per-instance divergence bound eps (2/g + gap/Delta) of the scalar protocol.
double ScalarSumDivergenceBound(const ScalarSumParams& params, double gap);

// (eps/gamma)(2/g + gap/Delta) when only a gamma fraction of users is honest.
// Requires gamma in [1/3, 1], g >= 3 and eps <= 1.
double RobustScalarSumBound(const ScalarSumParams& params, double gamma_honest,
                            double gap);

// eps' = sum eps_j (e^eps_j - 1) + 2 sqrt(ln(1/gamma) sum eps_j^2),
// delta' = sum delta_j + gamma.
PrivacyBudget ComposePerInstance(const CompositionInput& input);

// Per-round budget (eps / (2 sqrt(2 T ln(1/delta))), delta / (T + 1)).
PrivacyBudget FipRoundBudget(const PrivacyBudget& total, std::uint64_t rounds);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_ACCOUNTANT_H_
