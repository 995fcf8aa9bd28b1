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

#include "shuffle_sco/losses.h"

#include <algorithm>
#include <cmath>

namespace shuffle_sco {

QuadraticLoss::QuadraticLoss(double lipschitz) : lipschitz_(lipschitz) {
  if (!(lipschitz > 0.0)) {
    throw std::invalid_argument("quadratic loss: Lipschitz bound must be > 0");
  }
}

double QuadraticLoss::Value(const Vec& theta, const Datum& x) const {
  return 0.5 * (theta - x.x).squaredNorm();
}

Vec QuadraticLoss::Gradient(const Vec& theta, const Datum& x) const {
  return theta - x.x;
}

std::optional<Vec> QuadraticLoss::UnconstrainedProx(const Vec& theta,
                                                    const Datum& x,
                                                    double step) const {
  return Vec((theta + step * x.x) / (1.0 + step));
}

double LogisticLoss::Value(const Vec& theta, const Datum& x) const {
  const double margin = x.y * theta.dot(x.x);
  return margin > 0.0 ? std::log1p(std::exp(-margin))
                      : -margin + std::log1p(std::exp(margin));
}

Vec LogisticLoss::Gradient(const Vec& theta, const Datum& x) const {
  const double margin = x.y * theta.dot(x.x);
  // sigmoid(-margin), evaluated without overflow.
  const double weight = margin > 0.0
                            ? std::exp(-margin) / (1.0 + std::exp(-margin))
                            : 1.0 / (1.0 + std::exp(margin));
  return -x.y * weight * x.x;
}

double HingeLoss::Value(const Vec& theta, const Datum& x) const {
  return std::max(0.0, 1.0 - x.y * theta.dot(x.x));
}

Vec HingeLoss::Gradient(const Vec& theta, const Datum& x) const {
  if (x.y * theta.dot(x.x) < 1.0) return -x.y * x.x;
  return Vec::Zero(theta.size());
}

std::optional<Vec> HingeLoss::UnconstrainedProx(const Vec& theta,
                                                const Datum& x,
                                                double step) const {
  const double margin = x.y * theta.dot(x.x);
  const double q = x.x.squaredNorm();
  if (margin >= 1.0 || q == 0.0) return theta;
  if (margin <= 1.0 - step * q) return Vec(theta + step * x.y * x.x);
  return Vec(theta + ((1.0 - margin) / q) * x.y * x.x);
}

double AbsoluteLoss::Value(const Vec& theta, const Datum& x) const {
  return (theta - x.x).norm();
}

Vec AbsoluteLoss::Gradient(const Vec& theta, const Datum& x) const {
  Vec v = theta - x.x;
  const double n = v.norm();
  if (n == 0.0) return Vec::Zero(theta.size());
  return v / n;
}

std::optional<Vec> AbsoluteLoss::UnconstrainedProx(const Vec& theta,
                                                   const Datum& x,
                                                   double step) const {
  Vec v = theta - x.x;
  const double n = v.norm();
  if (n <= step) return x.x;
  return Vec(x.x + v * (1.0 - step / n));
}

}  // namespace shuffle_sco
