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

#ifndef SHUFFLE_SCO_DIVERGENCE_H_
#define SHUFFLE_SCO_DIVERGENCE_H_

#include <cstdint>
#include <vector>

namespace shuffle_sco {

// Probability mass function over a strictly increasing integer support.
class FiniteDistribution {
 public:
  FiniteDistribution() = default;

  // Throws unless support is strictly increasing, sizes match, every mass is
  // nonnegative and the total is 1 within 1e-12.
  FiniteDistribution(std::vector<std::int64_t> support,
                     std::vector<double> probabilities);

  // Masses on the contiguous support {offset, offset + 1, ...}.
  static FiniteDistribution Contiguous(std::int64_t offset,
                                       std::vector<double> probabilities);

  static FiniteDistribution PointMass(std::int64_t at);

  // Exact Binomial(trials, p) law, evaluated through log-gamma.
  static FiniteDistribution Binomial(std::uint64_t trials, double p);

  const std::vector<std::int64_t>& support() const { return support_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  std::size_t size() const { return support_.size(); }

  double Mass(std::int64_t at) const;
  double Mean() const;
  double Variance() const;

  FiniteDistribution Shifted(std::int64_t by) const;

  // Law of the sum of independent draws from *this and `other`.
  FiniteDistribution Convolve(const FiniteDistribution& other) const;

 private:
  std::vector<std::int64_t> support_;
  std::vector<double> probabilities_;
};

// log Binomial(trials, p) pmf at k; -inf outside [0, trials].
double LogBinomialPmf(std::uint64_t trials, double p, std::int64_t k);

// Exact approximate max divergence
//   D_inf^delta(P || Q) = max_{Z : P(Z) >= delta} log((P(Z) - delta) / Q(Z)).
// Outcomes are sorted by likelihood ratio P/Q, descending; the maximizing Z is
// always such a prefix. Returns +inf when a qualifying prefix has Q(Z) = 0 and
// P(Z) > delta, and -inf when no prefix yields positive P(Z) - delta.
double ApproxMaxDivergence(const FiniteDistribution& p,
                           const FiniteDistribution& q, double delta);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_DIVERGENCE_H_
