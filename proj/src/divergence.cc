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

#include "shuffle_sco/divergence.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace shuffle_sco {

namespace {

constexpr double kMassTolerance = 1e-12;

}  // namespace

FiniteDistribution::FiniteDistribution(std::vector<std::int64_t> support,
                                       std::vector<double> probabilities)
    : support_(std::move(support)), probabilities_(std::move(probabilities)) {
  if (support_.size() != probabilities_.size()) {
    throw std::invalid_argument("FiniteDistribution: size mismatch");
  }
  if (support_.empty()) {
    throw std::invalid_argument("FiniteDistribution: empty support");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support_.size(); ++i) {
    if (i > 0 && support_[i] <= support_[i - 1]) {
      throw std::invalid_argument(
          "FiniteDistribution: support must be strictly increasing");
    }
    if (!(probabilities_[i] >= 0.0)) {
      throw std::invalid_argument("FiniteDistribution: negative mass");
    }
    total += probabilities_[i];
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::invalid_argument("FiniteDistribution: masses do not sum to 1");
  }
}

FiniteDistribution FiniteDistribution::Contiguous(
    std::int64_t offset, std::vector<double> probabilities) {
  std::vector<std::int64_t> support(probabilities.size());
  std::iota(support.begin(), support.end(), offset);
  return FiniteDistribution(std::move(support), std::move(probabilities));
}

FiniteDistribution FiniteDistribution::PointMass(std::int64_t at) {
  return FiniteDistribution({at}, {1.0});
}

double LogBinomialPmf(std::uint64_t trials, double p, std::int64_t k) {
  if (k < 0 || static_cast<std::uint64_t>(k) > trials) {
    return -std::numeric_limits<double>::infinity();
  }
  const double n = static_cast<double>(trials);
  const double kk = static_cast<double>(k);
  if (p == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  if (p == 1.0) {
    return static_cast<std::uint64_t>(k) == trials
               ? 0.0
               : -std::numeric_limits<double>::infinity();
  }
  return std::lgamma(n + 1.0) - std::lgamma(kk + 1.0) -
         std::lgamma(n - kk + 1.0) + kk * std::log(p) +
         (n - kk) * std::log1p(-p);
}

FiniteDistribution FiniteDistribution::Binomial(std::uint64_t trials,
                                                double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("Binomial: p outside [0, 1]");
  }
  std::vector<double> pmf(trials + 1);
  double total = 0.0;
  for (std::uint64_t k = 0; k <= trials; ++k) {
    pmf[k] = std::exp(LogBinomialPmf(trials, p, static_cast<std::int64_t>(k)));
    total += pmf[k];
  }
  // lgamma rounding leaves the total a few ulps away from 1.
  for (double& m : pmf) m /= total;
  return Contiguous(0, std::move(pmf));
}

double FiniteDistribution::Mass(std::int64_t at) const {
  auto it = std::lower_bound(support_.begin(), support_.end(), at);
  if (it == support_.end() || *it != at) return 0.0;
  return probabilities_[static_cast<std::size_t>(it - support_.begin())];
}

double FiniteDistribution::Mean() const {
  double mean = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    mean += static_cast<double>(support_[i]) * probabilities_[i];
  }
  return mean;
}

double FiniteDistribution::Variance() const {
  const double mean = Mean();
  double var = 0.0;
  for (std::size_t i = 0; i < size(); ++i) {
    const double c = static_cast<double>(support_[i]) - mean;
    var += c * c * probabilities_[i];
  }
  return var;
}

FiniteDistribution FiniteDistribution::Shifted(std::int64_t by) const {
  FiniteDistribution out = *this;
  for (auto& s : out.support_) s += by;
  return out;
}

FiniteDistribution FiniteDistribution::Convolve(
    const FiniteDistribution& other) const {
  const std::int64_t lo = support_.front() + other.support_.front();
  const std::int64_t hi = support_.back() + other.support_.back();
  std::vector<double> dense(static_cast<std::size_t>(hi - lo + 1), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    const double pi = probabilities_[i];
    if (pi == 0.0) continue;
    for (std::size_t j = 0; j < other.size(); ++j) {
      dense[static_cast<std::size_t>(support_[i] + other.support_[j] - lo)] +=
          pi * other.probabilities_[j];
    }
  }
  double total = std::accumulate(dense.begin(), dense.end(), 0.0);
  for (double& m : dense) m /= total;
  return Contiguous(lo, std::move(dense));
}

double ApproxMaxDivergence(const FiniteDistribution& p,
                           const FiniteDistribution& q, double delta) {
  if (delta < 0.0) {
    throw std::invalid_argument("ApproxMaxDivergence: negative delta");
  }
  constexpr double kInf = std::numeric_limits<double>::infinity();

  struct Outcome {
    double p;
    double q;
    double log_ratio;
  };
  std::vector<Outcome> outcomes;
  outcomes.reserve(p.size() + q.size());

  // Merge the two sorted supports.
  const auto& ps = p.support();
  const auto& qs = q.support();
  std::size_t i = 0, j = 0;
  while (i < ps.size() || j < qs.size()) {
    double pm = 0.0, qm = 0.0;
    if (j == qs.size() || (i < ps.size() && ps[i] < qs[j])) {
      pm = p.probabilities()[i++];
    } else if (i == ps.size() || qs[j] < ps[i]) {
      qm = q.probabilities()[j++];
    } else {
      pm = p.probabilities()[i++];
      qm = q.probabilities()[j++];
    }
    // Outcomes with no P-mass never enlarge (P(Z) - delta) / Q(Z).
    if (pm == 0.0) continue;
    const double lr = qm == 0.0 ? kInf : std::log(pm) - std::log(qm);
    outcomes.push_back({pm, qm, lr});
  }
  std::stable_sort(outcomes.begin(), outcomes.end(),
                   [](const Outcome& a, const Outcome& b) {
                     return a.log_ratio > b.log_ratio;
                   });

  double best = -kInf;
  double mass_p = 0.0, mass_q = 0.0;
  for (const Outcome& o : outcomes) {
    mass_p += o.p;
    mass_q += o.q;
    const double excess = mass_p - delta;
    if (!(excess > 0.0)) continue;
    if (mass_q == 0.0) return kInf;
    best = std::max(best, std::log(excess / mass_q));
  }
  return best;
}

}  // namespace shuffle_sco
