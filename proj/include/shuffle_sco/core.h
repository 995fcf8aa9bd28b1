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

#ifndef SHUFFLE_SCO_CORE_H_
#define SHUFFLE_SCO_CORE_H_

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shuffle_sco {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Vec = Vector<double>;

// An (epsilon, delta) pair. Construction is unchecked; operations that select
// protocol parameters validate the ranges they need.
struct PrivacyBudget {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Throws std::invalid_argument unless epsilon > 0 and 0 < delta < 1/2.
void RequireValidBudget(const PrivacyBudget& budget);

// Closed Euclidean ball {theta : |theta - center| <= radius}.
template <typename Scalar>
class ParameterSpace {
 public:
  ParameterSpace(Vector<Scalar> center, Scalar radius)
      : center_(std::move(center)), radius_(radius) {
    if (center_.size() == 0) {
      throw std::invalid_argument("ParameterSpace: dimension must be positive");
    }
    if (!(radius_ > Scalar(0))) {
      throw std::invalid_argument("ParameterSpace: radius must be positive");
    }
  }

  // Ball of the given radius around the origin.
  static ParameterSpace Centered(Eigen::Index dim, Scalar radius) {
    return ParameterSpace(Vector<Scalar>::Zero(dim), radius);
  }

  Eigen::Index dim() const { return center_.size(); }
  const Vector<Scalar>& center() const { return center_; }
  Scalar radius() const { return radius_; }
  Scalar diameter() const { return Scalar(2) * radius_; }

  bool Contains(const Vector<Scalar>& theta) const {
    return (theta - center_).norm() <= radius_;
  }

 private:
  Vector<Scalar> center_;
  Scalar radius_;
};

using Ball = ParameterSpace<double>;

// Euclidean projection onto the ball.
template <typename Derived>
Vector<typename Derived::Scalar> ProjectToBall(
    const Eigen::MatrixBase<Derived>& theta,
    const ParameterSpace<typename Derived::Scalar>& space) {
  using Scalar = typename Derived::Scalar;
  if (theta.size() != space.dim()) {
    throw std::invalid_argument("ProjectToBall: dimension mismatch");
  }
  Vector<Scalar> offset = theta - space.center();
  const Scalar norm = offset.norm();
  if (norm <= space.radius()) return theta;
  // Scaling can land one ulp outside; clamp so the result is always feasible.
  Scalar target = space.radius();
  Vector<Scalar> out = space.center() + offset * (target / norm);
  while ((out - space.center()).norm() > space.radius()) {
    target = std::nextafter(target, Scalar(0));
    out = space.center() + offset * (target / norm);
  }
  return out;
}

// |sum(x) - sum(x')|_2 for two equally sized vector datasets.
template <typename Scalar>
Scalar L2DistanceOfSums(std::span<const Vector<Scalar>> x,
                        std::span<const Vector<Scalar>> x_prime) {
  if (x.size() != x_prime.size()) {
    throw std::invalid_argument("L2DistanceOfSums: datasets differ in size");
  }
  if (x.empty()) return Scalar(0);
  const Eigen::Index dim = x.front().size();
  Vector<Scalar> diff = Vector<Scalar>::Zero(dim);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != dim || x_prime[i].size() != dim) {
      throw std::invalid_argument("L2DistanceOfSums: dimension mismatch");
    }
    diff += x[i] - x_prime[i];
  }
  return diff.norm();
}

// One user's data point. `y` carries a label for classification losses and is
// ignored elsewhere.
struct Datum {
  Vec x;
  double y = 0.0;
};

using Dataset = std::vector<Datum>;

// Index of the single point where two vector datasets differ, or -1 when they
// are equal. Throws when they differ in more than one point.
template <typename Scalar>
long NeighborIndex(std::span<const Vector<Scalar>> x,
                   std::span<const Vector<Scalar>> x_prime) {
  if (x.size() != x_prime.size()) {
    throw std::invalid_argument("NeighborIndex: datasets differ in size");
  }
  long found = -1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != x_prime[i].size()) {
      throw std::invalid_argument("NeighborIndex: dimension mismatch");
    }
    if (x[i] != x_prime[i]) {
      if (found >= 0) {
        throw std::invalid_argument(
            "NeighborIndex: datasets differ in more than one point");
      }
      found = static_cast<long>(i);
    }
  }
  return found;
}

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_CORE_H_
