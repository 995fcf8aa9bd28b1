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

#include "shuffle_sco/accountant.h"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>

namespace shuffle_sco {

namespace {

// Keeps (g + b) * n and b * n well inside uint64.
constexpr double kMaxMessageCount = 1.5e19;

void RequireShuffleSumBudget(const PrivacyBudget& budget) {
  RequireValidBudget(budget);
  if (budget.epsilon > kMaxShuffleSumEpsilon) {
    throw std::invalid_argument(
        "shuffle-sum parameters require epsilon <= 15, got " +
        std::to_string(budget.epsilon));
  }
}

}  // namespace

void RequireValidBudget(const PrivacyBudget& budget) {
  if (!(budget.epsilon > 0.0) || !std::isfinite(budget.epsilon)) {
    throw std::invalid_argument("privacy budget requires epsilon > 0");
  }
  if (!(budget.delta > 0.0 && budget.delta < 0.5)) {
    throw std::invalid_argument("privacy budget requires 0 < delta < 1/2");
  }
}

PrivacyBudget BinomialMechanismBudget(const BinomialMechBound& mech) {
  if (mech.m < 1) throw std::invalid_argument("binomial mechanism: m >= 1");
  if (!(mech.p > 0.0 && mech.p <= 0.5)) {
    throw std::invalid_argument("binomial mechanism: p must be in (0, 1/2]");
  }
  if (!(mech.alpha > 0.0 && mech.alpha < 1.0)) {
    throw std::invalid_argument("binomial mechanism: alpha must be in (0, 1)");
  }
  if (static_cast<std::uint64_t>(std::llabs(mech.shift)) > mech.t) {
    throw std::invalid_argument("binomial mechanism: |shift| exceeds t");
  }
  const double amp = mech.alpha * static_cast<double>(mech.m) * mech.p;
  if (amp < 2.0 * static_cast<double>(mech.t)) {
    throw std::invalid_argument(
        "binomial mechanism: requires alpha * m * p >= 2t");
  }
  PrivacyBudget out;
  out.epsilon = static_cast<double>(std::llabs(mech.shift)) *
                std::log((1.0 + mech.alpha) / (1.0 - mech.alpha));
  out.delta = 2.0 * std::exp(-mech.alpha * amp / 10.0);
  return out;
}

ScalarSumParams SelectScalarSumParamsWithGrain(std::uint64_t n, double range,
                                               std::uint64_t grain,
                                               const PrivacyBudget& budget) {
  RequireShuffleSumBudget(budget);
  if (n < 1) throw std::invalid_argument("scalar sum: n must be >= 1");
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw std::invalid_argument("scalar sum: range must be positive");
  }
  const double nd = static_cast<double>(n);
  if (static_cast<double>(grain) < range * std::sqrt(nd) || grain < 1) {
    throw std::invalid_argument("scalar sum: grain must be >= range*sqrt(n)");
  }
  const double g = static_cast<double>(grain);
  const double eps = budget.epsilon;
  const double bound =
      180.0 * g * g * std::log(2.0 / budget.delta) / (eps * eps * nd);
  if (!(bound + 1.0 + g < kMaxMessageCount / nd)) {
    throw std::overflow_error("scalar sum: message count overflows uint64");
  }
  ScalarSumParams params;
  params.range = range;
  params.grain = grain;
  params.trials = static_cast<std::uint64_t>(std::floor(bound)) + 1;
  params.p = (bound / 2.0) / static_cast<double>(params.trials);
  params.users = n;
  params.epsilon = budget.epsilon;
  params.delta = budget.delta;
  if (!(params.p < 0.5)) {
    throw std::overflow_error("scalar sum: trial count exceeds double range");
  }
  return params;
}

ScalarSumParams SelectScalarSumParams(std::uint64_t n, double range,
                                      const PrivacyBudget& budget) {
  if (n < 1) throw std::invalid_argument("scalar sum: n must be >= 1");
  if (!(range > 0.0) || !std::isfinite(range)) {
    throw std::invalid_argument("scalar sum: range must be positive");
  }
  const double g = std::ceil(range * std::sqrt(static_cast<double>(n)));
  return SelectScalarSumParamsWithGrain(
      n, range, static_cast<std::uint64_t>(std::max(g, 1.0)), budget);
}

VectorSumParams SelectVectorSumParams(std::uint64_t n, std::uint64_t d,
                                      double l2_cap,
                                      const PrivacyBudget& budget) {
  RequireShuffleSumBudget(budget);
  if (d < 1) throw std::invalid_argument("vector sum: d must be >= 1");
  if (n < 1) throw std::invalid_argument("vector sum: n must be >= 1");
  if (!(l2_cap > 0.0) || !std::isfinite(l2_cap)) {
    throw std::invalid_argument("vector sum: l2 cap must be positive");
  }
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  VectorSumParams params;
  params.dim = d;
  params.l2_cap = l2_cap;
  params.users = n;
  params.budget = budget;
  params.delta_hat = budget.delta / (dd + 1.0);
  // Sterbenz: delta - d * delta_hat is exact, so the identity is bitwise.
  params.gamma = budget.delta - dd * params.delta_hat;
  params.eps_hat =
      budget.epsilon / (18.0 * std::sqrt(std::log(1.0 / params.gamma)));
  const double g =
      std::ceil(std::max({2.0 * l2_cap * std::sqrt(nd), std::sqrt(dd), 4.0}));
  params.per_coord = SelectScalarSumParamsWithGrain(
      n, 2.0 * l2_cap, static_cast<std::uint64_t>(g),
      PrivacyBudget{params.eps_hat, params.delta_hat});
  return params;
}

double ScalarSumDivergenceBound(const ScalarSumParams& params, double gap) {
  if (!(gap >= 0.0 && gap <= params.range)) {
    throw std::invalid_argument("divergence bound: gap must be in [0, range]");
  }
  return params.epsilon *
         (2.0 / static_cast<double>(params.grain) + gap / params.range);
}

double RobustScalarSumBound(const ScalarSumParams& params, double gamma_honest,
                            double gap) {
  if (!(gamma_honest >= 1.0 / 3.0 && gamma_honest <= 1.0)) {
    throw std::invalid_argument("robust bound: honest fraction must be in [1/3, 1]");
  }
  if (params.grain < 3) {
    throw std::invalid_argument("robust bound: requires g >= 3");
  }
  if (!(params.epsilon <= 1.0)) {
    throw std::invalid_argument("robust bound: requires epsilon <= 1");
  }
  return ScalarSumDivergenceBound(params, gap) / gamma_honest;
}

PrivacyBudget ComposePerInstance(const CompositionInput& input) {
  if (!(input.gamma > 0.0 && input.gamma < 1.0)) {
    throw std::invalid_argument("composition: gamma must be in (0, 1)");
  }
  double linear = 0.0, squares = 0.0, delta = 0.0;
  for (const PrivacyBudget& b : input.per_coordinate) {
    if (!(b.epsilon >= 0.0) || !std::isfinite(b.epsilon)) {
      throw std::invalid_argument("composition: epsilon_j must be >= 0");
    }
    if (!(b.delta >= 0.0 && b.delta < 1.0)) {
      throw std::invalid_argument("composition: delta_j must be in [0, 1)");
    }
    linear += b.epsilon * std::expm1(b.epsilon);
    squares += b.epsilon * b.epsilon;
    delta += b.delta;
  }
  return PrivacyBudget{
      linear + 2.0 * std::sqrt(std::log(1.0 / input.gamma) * squares),
      delta + input.gamma};
}

PrivacyBudget FipRoundBudget(const PrivacyBudget& total, std::uint64_t rounds) {
  if (rounds == 0) throw std::invalid_argument("round budget: T must be >= 1");
  RequireValidBudget(total);
  const double t = static_cast<double>(rounds);
  return PrivacyBudget{
      total.epsilon / (2.0 * std::sqrt(2.0 * t * std::log(1.0 / total.delta))),
      total.delta / (t + 1.0)};
}

}  // namespace shuffle_sco
