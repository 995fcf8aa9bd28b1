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

#include "shuffle_sco/scalar_sum.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shuffle_sco {

namespace {

struct Encoding {
  std::uint64_t floor_part;
  double fraction;
};

Encoding Encode(double x, const ScalarSumParams& params) {
  if (!(x >= 0.0 && x <= params.range)) {
    throw std::invalid_argument("scalar sum: input outside [0, range]");
  }
  const double g = static_cast<double>(params.grain);
  const double scaled = std::clamp(x / params.range * g, 0.0, g);
  const double fl = std::floor(scaled);
  return {static_cast<std::uint64_t>(fl), scaled - fl};
}

}  // namespace

std::uint64_t EncodeFixedPoint(double x, const ScalarSumParams& params,
                               SeededRng& rng) {
  const Encoding e = Encode(x, params);
  return e.floor_part + (rng.Bernoulli(e.fraction) ? 1 : 0);
}

std::uint64_t RandomizeScalar(double x, const ScalarSumParams& params,
                              SeededRng& rng) {
  const std::uint64_t fixed = EncodeFixedPoint(x, params, rng);
  return fixed + rng.Binomial(params.trials, params.p);
}

ShuffledView Shuffle(std::span<const std::uint64_t> contributions,
                     const ScalarSumParams& params) {
  ShuffledView view;
  const std::uint64_t per_user = params.MessagesPerUser();
  for (std::uint64_t z : contributions) {
    if (z > per_user) {
      throw std::invalid_argument("shuffle: contribution exceeds g + b");
    }
    view.ones_count += z;
  }
  view.users = contributions.size();
  view.total_messages = per_user * view.users;
  return view;
}

ShuffledView ShuffleExplicit(std::span<const std::uint64_t> contributions,
                             const ScalarSumParams& params, SeededRng& rng) {
  ShuffledView view = Shuffle(contributions, params);
  if (view.total_messages > (std::uint64_t{1} << 26)) {
    throw std::length_error("explicit shuffle: too many messages");
  }
  view.bits.reserve(view.total_messages);
  const std::uint64_t per_user = params.MessagesPerUser();
  for (std::uint64_t z : contributions) {
    view.bits.insert(view.bits.end(), z, 1);
    view.bits.insert(view.bits.end(), per_user - z, 0);
  }
  std::shuffle(view.bits.begin(), view.bits.end(), rng);
  return view;
}

double AnalyzeScalar(const ShuffledView& view, const ScalarSumParams& params) {
  // Counts can exceed 2^53; the extended mantissa keeps them exact.
  const long double centered =
      static_cast<long double>(view.ones_count) -
      static_cast<long double>(params.p) *
          static_cast<long double>(params.trials) *
          static_cast<long double>(view.users);
  return static_cast<double>(static_cast<long double>(params.range) /
                             static_cast<long double>(params.grain) * centered);
}

ShuffledView RunScalarSum(std::span<const double> xs,
                          const ScalarSumParams& params, SeededRng& rng,
                          NoiseMode mode) {
  std::vector<std::uint64_t> contributions(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    contributions[i] = mode == NoiseMode::kPerUser
                           ? RandomizeScalar(xs[i], params, rng)
                           : EncodeFixedPoint(xs[i], params, rng);
  }
  ShuffledView view;
  if (mode == NoiseMode::kPerUser) {
    view = Shuffle(contributions, params);
  } else {
    for (std::uint64_t z : contributions) view.ones_count += z;
    view.users = xs.size();
    view.total_messages = params.MessagesPerUser() * view.users;
    view.ones_count += rng.Binomial(params.trials * view.users, params.p);
  }
  return view;
}

double AnalyticVariance(std::span<const double> xs,
                        const ScalarSumParams& params) {
  const double noise = static_cast<double>(params.trials) * params.p *
                       (1.0 - params.p);
  double total = 0.0;
  for (double x : xs) {
    const Encoding e = Encode(x, params);
    total += e.fraction * (1.0 - e.fraction) + noise;
  }
  const double scale = params.range / static_cast<double>(params.grain);
  return scale * scale * total;
}

double VarianceBound(const ScalarSumParams& params) {
  return kVarianceBoundConstant * params.range * params.range *
         std::log(2.0 / params.delta) / (params.epsilon * params.epsilon);
}

FiniteDistribution ExactOutputDistribution(std::span<const double> xs,
                                           const ScalarSumParams& params) {
  const std::uint64_t users = xs.size();
  if (users == 0) return FiniteDistribution::PointMass(0);
  if (params.MessagesPerUser() > kMaxExactSupport / users) {
    throw std::length_error("exact distribution: support too large");
  }
  // Sum of the rounding laws, then one Bin(b * users, p) by additivity.
  FiniteDistribution rounding = FiniteDistribution::PointMass(0);
  for (double x : xs) {
    const Encoding e = Encode(x, params);
    const auto base = static_cast<std::int64_t>(e.floor_part);
    FiniteDistribution user =
        e.fraction == 0.0
            ? FiniteDistribution::PointMass(base)
            : FiniteDistribution::Contiguous(base,
                                             {1.0 - e.fraction, e.fraction});
    rounding = rounding.Convolve(user);
  }
  return rounding.Convolve(
      FiniteDistribution::Binomial(params.trials * users, params.p));
}

}  // namespace shuffle_sco
