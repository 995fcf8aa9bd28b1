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

#include "shuffle_sco/robust.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace shuffle_sco {

namespace {

void RequireGamma(double gamma) {
  if (!(gamma >= 1.0 / 3.0 && gamma <= 1.0)) {
    throw std::invalid_argument("honest fraction must be in [1/3, 1]");
  }
}

}  // namespace

std::uint64_t MinimumHonest(std::uint64_t n, double gamma) {
  RequireGamma(gamma);
  // Guard against gamma * n landing one ulp above an integer.
  const double want = gamma * static_cast<double>(n);
  return static_cast<std::uint64_t>(std::ceil(want * (1.0 - 1e-12)));
}

HonestSubset HonestSubset::Prefix(std::uint64_t n, double gamma) {
  HonestSubset out;
  out.gamma = gamma;
  out.honest.resize(MinimumHonest(n, gamma));
  std::iota(out.honest.begin(), out.honest.end(), 0);
  return out;
}

HonestSubset HonestSubset::Sample(std::uint64_t n, double gamma,
                                  SeededRng& rng) {
  HonestSubset out;
  out.gamma = gamma;
  std::vector<std::uint64_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(MinimumHonest(n, gamma));
  std::sort(all.begin(), all.end());
  out.honest = std::move(all);
  return out;
}

void ValidateHonestSubset(const HonestSubset& subset, std::uint64_t n) {
  RequireGamma(subset.gamma);
  if (subset.honest.size() < MinimumHonest(n, subset.gamma)) {
    throw std::invalid_argument("honest subset smaller than ceil(gamma n)");
  }
  for (std::size_t i = 0; i < subset.honest.size(); ++i) {
    if (subset.honest[i] >= n ||
        (i > 0 && subset.honest[i] <= subset.honest[i - 1])) {
      throw std::invalid_argument("honest subset: invalid index set");
    }
  }
}

RobustScalarResult RunScalarWithDropouts(std::span<const double> xs,
                                         const ScalarSumParams& params,
                                         const HonestSubset& honest,
                                         SeededRng& rng, NoiseMode mode) {
  ValidateHonestSubset(honest, xs.size());
  std::vector<double> kept;
  kept.reserve(honest.honest.size());
  for (std::uint64_t i : honest.honest) kept.push_back(xs[i]);
  RobustScalarResult out;
  out.view = RunScalarSum(kept, params, rng, mode);
  out.estimate = AnalyzeScalar(out.view, params);
  out.divergence_bound =
      RobustScalarSumBound(params, honest.gamma, params.range);
  return out;
}

RobustVectorResult RunVectorWithDropouts(std::span<const Vec> xs,
                                         const VectorSumParams& params,
                                         const HonestSubset& honest,
                                         SeededRng& rng, NoiseMode mode) {
  ValidateHonestSubset(honest, xs.size());
  std::vector<Vec> kept;
  kept.reserve(honest.honest.size());
  for (std::uint64_t i : honest.honest) kept.push_back(xs[i]);
  RobustVectorResult out;
  out.report = RunVectorSum(kept, params, rng, mode);
  out.estimate = AnalyzeVector(out.report, params);
  return out;
}

VectorSumCertificate RobustVectorCertificate(std::span<const Vec> x,
                                             std::span<const Vec> x_prime,
                                             const VectorSumParams& params,
                                             double gamma_honest) {
  RequireGamma(gamma_honest);
  VectorSumCertificate cert = PrivacyCertificate(x, x_prime, params);
  CompositionInput input;
  input.gamma = params.gamma;
  cert.sum_squares = 0.0;
  for (double& eps : cert.eps_per_coord) {
    eps /= gamma_honest;
    cert.sum_squares += eps * eps;
    input.per_coordinate.push_back({eps, params.delta_hat});
  }
  cert.composed = ComposePerInstance(input);
  const double bound = 3.0 * params.eps_hat / gamma_honest;
  cert.squares_within_bound = cert.sum_squares <= bound * bound;
  cert.within_budget =
      cert.composed.epsilon <= params.budget.epsilon / gamma_honest &&
      cert.composed.delta <= params.budget.delta * (1.0 + 1e-12);
  return cert;
}

}  // namespace shuffle_sco
