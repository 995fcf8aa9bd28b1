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

#ifndef SHUFFLE_SCO_LOSSES_H_
#define SHUFFLE_SCO_LOSSES_H_

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "shuffle_sco/core.h"

namespace shuffle_sco {

// Per-example convex loss l(theta, x) with declared constants.
class LossModel {
 public:
  virtual ~LossModel() = default;

  virtual std::string name() const = 0;
  virtual double Value(const Vec& theta, const Datum& x) const = 0;
  virtual Vec Gradient(const Vec& theta, const Datum& x) const = 0;

  virtual double lipschitz() const = 0;
  virtual std::optional<double> smoothness() const { return std::nullopt; }
  virtual std::optional<double> strong_convexity() const {
    return std::nullopt;
  }

  // argmin_u l(u, x) + |u - theta|^2 / (2 step) over all of R^d, when a closed
  // form exists.
  virtual std::optional<Vec> UnconstrainedProx(const Vec& theta,
                                               const Datum& x,
                                               double step) const {
    (void)theta;
    (void)x;
    (void)step;
    return std::nullopt;
  }
};

// 0.5 |theta - x|^2. The Lipschitz constant is supplied by the caller since it
// depends on the parameter ball and the data radius.
class QuadraticLoss final : public LossModel {
 public:
  explicit QuadraticLoss(double lipschitz);

  std::string name() const override { return "quadratic"; }
  double Value(const Vec& theta, const Datum& x) const override;
  Vec Gradient(const Vec& theta, const Datum& x) const override;
  double lipschitz() const override { return lipschitz_; }
  std::optional<double> smoothness() const override { return 1.0; }
  std::optional<double> strong_convexity() const override { return 1.0; }
  std::optional<Vec> UnconstrainedProx(const Vec& theta, const Datum& x,
                                       double step) const override;

 private:
  double lipschitz_;
};

// log(1 + exp(-y <theta, x>)) for |x| <= 1, y in {-1, +1}.
class LogisticLoss final : public LossModel {
 public:
  std::string name() const override { return "logistic"; }
  double Value(const Vec& theta, const Datum& x) const override;
  Vec Gradient(const Vec& theta, const Datum& x) const override;
  double lipschitz() const override { return 1.0; }
  std::optional<double> smoothness() const override { return 0.25; }
};

// max(0, 1 - y <theta, x>) for |x| <= 1.
class HingeLoss final : public LossModel {
 public:
  std::string name() const override { return "hinge"; }
  double Value(const Vec& theta, const Datum& x) const override;
  Vec Gradient(const Vec& theta, const Datum& x) const override;
  double lipschitz() const override { return 1.0; }
  std::optional<Vec> UnconstrainedProx(const Vec& theta, const Datum& x,
                                       double step) const override;
};

// |theta - x|_2.
class AbsoluteLoss final : public LossModel {
 public:
  std::string name() const override { return "absolute"; }
  double Value(const Vec& theta, const Datum& x) const override;
  Vec Gradient(const Vec& theta, const Datum& x) const override;
  double lipschitz() const override { return 1.0; }
  std::optional<Vec> UnconstrainedProx(const Vec& theta, const Datum& x,
                                       double step) const override;
};

// Thrown when the iterative prox solve hits its iteration cap.
class ProxError : public std::runtime_error {
 public:
  ProxError(const std::string& what, Vec best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const Vec& best() const { return best_; }

 private:
  Vec best_;
};

inline constexpr int kProxMaxIterations = 500;
inline constexpr double kProxTolerance = 1e-8;

// argmin_{u in space} l(u, x) + |u - theta|^2 / (2 step). With a closed-form
// unconstrained prox the ball constraint is handled by bisection on its
// multiplier; otherwise projected (sub)gradient iterations are used.
Vec Prox(const LossModel& loss, const Ball& space, const Vec& theta,
         const Datum& x, double step, double tol = kProxTolerance);

// Envelope of u -> l(u, x) restricted to the ball:
//   f_beta(theta) = min_{u in space} l(u, x) + (beta/2)|theta - u|^2.
class MoreauEnvelope {
 public:
  MoreauEnvelope(const LossModel& base, Ball space, double beta,
                 double tol = 1e-12);

  const LossModel& base() const { return *base_; }
  const Ball& space() const { return space_; }
  double beta() const { return beta_; }
  double tol() const { return tol_; }

  Vec ProxPoint(const Vec& theta, const Datum& x) const;
  double Value(const Vec& theta, const Datum& x) const;
  // beta (theta - prox_{l/beta}(theta)).
  Vec Gradient(const Vec& theta, const Datum& x) const;

 private:
  const LossModel* base_;
  Ball space_;
  double beta_;
  double tol_;
};

// Adapts an envelope to the LossModel interface: Lipschitz 2L, smooth beta,
// strongly convex with lambda beta / (lambda + beta) when the base is.
class EnvelopeLoss final : public LossModel {
 public:
  explicit EnvelopeLoss(MoreauEnvelope envelope);

  const MoreauEnvelope& envelope() const { return envelope_; }

  std::string name() const override;
  double Value(const Vec& theta, const Datum& x) const override;
  Vec Gradient(const Vec& theta, const Datum& x) const override;
  double lipschitz() const override;
  std::optional<double> smoothness() const override;
  std::optional<double> strong_convexity() const override;

 private:
  MoreauEnvelope envelope_;
};

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_LOSSES_H_
