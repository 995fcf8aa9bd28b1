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

#include "shuffle_sco/vector_sum.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shuffle_sco {

namespace {

constexpr double kNormSlack = 1e-9;

void RequireFeasible(const Vec& x, const VectorSumParams& params) {
  if (static_cast<std::uint64_t>(x.size()) != params.dim) {
    throw std::invalid_argument("vector sum: dimension mismatch");
  }
  if (x.norm() > params.l2_cap * (1.0 + kNormSlack)) {
    throw std::invalid_argument("vector sum: input norm exceeds l2 cap");
  }
}

// Shifted coordinate, clamped so the slack above cannot leave [0, 2 Delta_2].
double Shift(double v, const VectorSumParams& params) {
  return std::clamp(v + params.l2_cap, 0.0, 2.0 * params.l2_cap);
}

}  // namespace

std::vector<std::uint64_t> RandomizeVector(const Vec& x,
                                           const VectorSumParams& params,
                                           SeededRng& rng) {
  RequireFeasible(x, params);
  std::vector<std::uint64_t> out(params.dim);
  for (std::uint64_t j = 0; j < params.dim; ++j) {
    out[j] = RandomizeScalar(Shift(x[j], params), params.per_coord, rng);
  }
  return out;
}

VectorSumReport RunVectorSum(std::span<const Vec> xs,
                             const VectorSumParams& params, SeededRng& rng,
                             NoiseMode mode) {
  VectorSumReport report;
  report.views.resize(params.dim);
  const std::uint64_t users = xs.size();
  for (ShuffledView& v : report.views) {
    v.users = users;
    v.total_messages = params.per_coord.MessagesPerUser() * users;
  }
  for (const Vec& x : xs) {
    if (mode == NoiseMode::kPerUser) {
      const std::vector<std::uint64_t> z = RandomizeVector(x, params, rng);
      for (std::uint64_t j = 0; j < params.dim; ++j) {
        report.views[j].ones_count += z[j];
      }
    } else {
      RequireFeasible(x, params);
      for (std::uint64_t j = 0; j < params.dim; ++j) {
        report.views[j].ones_count +=
            EncodeFixedPoint(Shift(x[j], params), params.per_coord, rng);
      }
    }
  }
  if (mode == NoiseMode::kPooled) {
    for (ShuffledView& v : report.views) {
      v.ones_count += rng.Binomial(params.per_coord.trials * users,
                                   params.per_coord.p);
    }
  }
  return report;
}

Vec AnalyzeVector(const VectorSumReport& report,
                  const VectorSumParams& params) {
  if (report.views.size() != params.dim) {
    throw std::invalid_argument("analyze vector: dimension mismatch");
  }
  Vec out(params.dim);
  for (std::uint64_t j = 0; j < params.dim; ++j) {
    const ShuffledView& v = report.views[j];
    out[j] = AnalyzeScalar(v, params.per_coord) -
             static_cast<double>(v.users) * params.l2_cap;
  }
  return out;
}

Vec CoordinateVariances(std::span<const Vec> xs,
                        const VectorSumParams& params) {
  std::vector<double> column(xs.size());
  Vec out(static_cast<Eigen::Index>(params.dim));
  for (std::uint64_t j = 0; j < params.dim; ++j) {
    for (std::size_t i = 0; i < xs.size(); ++i) {
      RequireFeasible(xs[i], params);
      column[i] = Shift(xs[i][j], params);
    }
    out[static_cast<Eigen::Index>(j)] =
        AnalyticVariance(column, params.per_coord);
  }
  return out;
}

double VectorSumVariance(std::span<const Vec> xs,
                         const VectorSumParams& params) {
  return CoordinateVariances(xs, params).sum();
}

double WorstCaseCoordinateVariance(const VectorSumParams& params,
                                   std::uint64_t users) {
  const ScalarSumParams& s = params.per_coord;
  const double scale = s.range / static_cast<double>(s.grain);
  return scale * scale * static_cast<double>(users) *
         (0.25 + static_cast<double>(s.trials) * s.p * (1.0 - s.p));
}

double VectorVarianceBound(const VectorSumParams& params) {
  const double d = static_cast<double>(params.dim);
  const double log_term = std::log((d + 1.0) / params.budget.delta);
  return kVectorVarianceConstant * d * params.l2_cap * params.l2_cap *
         log_term * log_term /
         (params.budget.epsilon * params.budget.epsilon);
}

VectorSumCertificate PrivacyCertificate(std::span<const Vec> x,
                                        std::span<const Vec> x_prime,
                                        const VectorSumParams& params) {
  for (const Vec& v : x) RequireFeasible(v, params);
  for (const Vec& v : x_prime) RequireFeasible(v, params);
  const long u = NeighborIndex<double>(x, x_prime);

  VectorSumCertificate cert;
  const double g = static_cast<double>(params.per_coord.grain);
  CompositionInput input;
  input.gamma = params.gamma;
  for (std::uint64_t j = 0; j < params.dim; ++j) {
    const double a =
        u < 0 ? 0.0
              : std::abs(Shift(x[u][j], params) - Shift(x_prime[u][j], params));
    const double eps_j = params.eps_hat * (2.0 / g + a / (2.0 * params.l2_cap));
    cert.eps_per_coord.push_back(eps_j);
    cert.sum_squares += eps_j * eps_j;
    input.per_coordinate.push_back({eps_j, params.delta_hat});
  }
  cert.composed = ComposePerInstance(input);
  cert.squares_within_bound =
      cert.sum_squares <= 9.0 * params.eps_hat * params.eps_hat;
  cert.within_budget = cert.composed.epsilon <= params.budget.epsilon &&
                       // Summing d copies of delta_hat may round up by an ulp.
                       cert.composed.delta <= params.budget.delta * (1.0 + 1e-12);
  return cert;
}

}  // namespace shuffle_sco
