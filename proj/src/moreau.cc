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

#include <cmath>
#include <limits>

#include "shuffle_sco/losses.h"

namespace shuffle_sco {

namespace {

constexpr int kMaxBracketDoublings = 200;
constexpr int kMaxBisections = 200;

double ProxObjective(const LossModel& loss, const Vec& u, const Vec& theta,
                     const Datum& x, double step) {
  return loss.Value(u, x) + (u - theta).squaredNorm() / (2.0 * step);
}

// Multiplier mu for the ball constraint: the constrained prox is
// uprox_{step/(1+mu)}((theta + mu c) / (1 + mu)) at the mu where it touches the
// sphere.
Vec ConstrainedClosedForm(const LossModel& loss, const Ball& space,
                          const Vec& theta, const Datum& x, double step,
                          const Vec& unconstrained) {
  const Vec& c = space.center();
  auto at = [&](double mu) {
    return *loss.UnconstrainedProx((theta + mu * c) / (1.0 + mu), x,
                                   step / (1.0 + mu));
  };
  double lo = 0.0, hi = 1.0;
  Vec u_hi = at(hi);
  for (int i = 0; (u_hi - c).norm() > space.radius(); ++i) {
    if (i == kMaxBracketDoublings) {
      throw ProxError("prox: could not bracket the ball multiplier",
                      ProjectToBall(unconstrained, space));
    }
    lo = hi;
    hi *= 2.0;
    u_hi = at(hi);
  }
  for (int i = 0; i < kMaxBisections; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    Vec u = at(mid);
    if ((u - c).norm() > space.radius()) {
      lo = mid;
    } else {
      hi = mid;
      u_hi = std::move(u);
    }
  }
  return ProjectToBall(u_hi, space);
}

Vec IterativeProx(const LossModel& loss, const Ball& space, const Vec& theta,
                  const Datum& x, double step, double tol) {
  Vec u = ProjectToBall(theta, space);
  Vec best = u;
  double best_value = ProxObjective(loss, u, theta, x, step);
  const std::optional<double> beta = loss.smoothness();
  for (int k = 0; k < kProxMaxIterations; ++k) {
    const Vec grad = loss.Gradient(u, x) + (u - theta) / step;
    // Smooth: constant step for the (beta + 1/step)-smooth objective.
    // Otherwise the 1/(mu k) schedule of a 1/step-strongly convex objective.
    const double eta = beta ? 1.0 / (*beta + 1.0 / step) : step / (k + 1.0);
    Vec next = ProjectToBall(u - eta * grad, space);
    const double moved = (next - u).norm();
    u = std::move(next);
    const double value = ProxObjective(loss, u, theta, x, step);
    if (value < best_value) {
      best_value = value;
      best = u;
    }
    if (moved <= tol) return beta ? u : best;
  }
  throw ProxError("prox: inner solve exceeded iteration cap", best);
}

}  // namespace

Vec Prox(const LossModel& loss, const Ball& space, const Vec& theta,
         const Datum& x, double step, double tol) {
  if (!(step > 0.0)) throw std::invalid_argument("prox: step must be > 0");
  if (theta.size() != space.dim()) {
    throw std::invalid_argument("prox: dimension mismatch");
  }
  if (std::optional<Vec> u = loss.UnconstrainedProx(theta, x, step)) {
    if (space.Contains(*u)) return *u;
    return ConstrainedClosedForm(loss, space, theta, x, step, *u);
  }
  return IterativeProx(loss, space, theta, x, step, tol);
}

MoreauEnvelope::MoreauEnvelope(const LossModel& base, Ball space, double beta,
                               double tol)
    : base_(&base), space_(std::move(space)), beta_(beta), tol_(tol) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("Moreau envelope: beta must be positive");
  }
}

Vec MoreauEnvelope::ProxPoint(const Vec& theta, const Datum& x) const {
  return Prox(*base_, space_, theta, x, 1.0 / beta_, tol_);
}

double MoreauEnvelope::Value(const Vec& theta, const Datum& x) const {
  const Vec u = ProxPoint(theta, x);
  return base_->Value(u, x) + 0.5 * beta_ * (theta - u).squaredNorm();
}

Vec MoreauEnvelope::Gradient(const Vec& theta, const Datum& x) const {
  return beta_ * (theta - ProxPoint(theta, x));
}

EnvelopeLoss::EnvelopeLoss(MoreauEnvelope envelope)
    : envelope_(std::move(envelope)) {}

std::string EnvelopeLoss::name() const {
  return envelope_.base().name() + "_envelope";
}

double EnvelopeLoss::Value(const Vec& theta, const Datum& x) const {
  return envelope_.Value(theta, x);
}

Vec EnvelopeLoss::Gradient(const Vec& theta, const Datum& x) const {
  return envelope_.Gradient(theta, x);
}

double EnvelopeLoss::lipschitz() const {
  return 2.0 * envelope_.base().lipschitz();
}

std::optional<double> EnvelopeLoss::smoothness() const {
  return envelope_.beta();
}

std::optional<double> EnvelopeLoss::strong_convexity() const {
  const std::optional<double> lambda = envelope_.base().strong_convexity();
  if (!lambda) return std::nullopt;
  return *lambda * envelope_.beta() / (*lambda + envelope_.beta());
}

}  // namespace shuffle_sco
