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

#include "shuffle_sco/synth.h"

#include <cmath>
#include <stdexcept>

namespace shuffle_sco {

namespace {

constexpr int kHingeReferenceIterations = 2000;

Vec TruthFor(LossKind kind, std::size_t d, const SynthOptions& options) {
  if (options.truth.size() == 0) return DefaultTruth(kind, d);
  if (static_cast<std::size_t>(options.truth.size()) != d) {
    throw std::invalid_argument("synth: truth dimension mismatch");
  }
  return options.truth;
}

}  // namespace

LossKind ParseLossKind(std::string_view name) {
  if (name == "quadratic") return LossKind::kQuadratic;
  if (name == "logistic") return LossKind::kLogistic;
  if (name == "hinge") return LossKind::kHinge;
  if (name == "absolute") return LossKind::kAbsolute;
  throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

std::string ToString(LossKind kind) {
  switch (kind) {
    case LossKind::kQuadratic:
      return "quadratic";
    case LossKind::kLogistic:
      return "logistic";
    case LossKind::kHinge:
      return "hinge";
    case LossKind::kAbsolute:
      return "absolute";
  }
  return "unknown";
}

Vec UniformInBall(std::size_t d, double radius, SeededRng& rng) {
  Vec v(d);
  for (std::size_t j = 0; j < d; ++j) v[j] = rng.Gaussian(1.0);
  const double norm = v.norm();
  if (norm == 0.0) return Vec::Zero(d);
  const double r = radius * std::pow(rng.Uniform(), 1.0 / static_cast<double>(d));
  return v * (r / norm);
}

Vec DefaultTruth(LossKind kind, std::size_t d) {
  if (kind == LossKind::kQuadratic || kind == LossKind::kAbsolute) {
    return Vec::Zero(d);
  }
  return Vec::Constant(d, 0.5 / std::sqrt(static_cast<double>(d)));
}

SynthSample SynthData(LossKind kind, std::size_t n, std::size_t d,
                      SeededRng& rng, const SynthOptions& options) {
  if (d == 0) throw std::invalid_argument("synth: d must be >= 1");
  const Vec truth = TruthFor(kind, d, options);
  SynthSample out;
  out.data.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Datum datum;
    switch (kind) {
      case LossKind::kQuadratic:
      case LossKind::kAbsolute:
        datum.x = truth + UniformInBall(d, options.data_radius, rng);
        break;
      case LossKind::kLogistic: {
        datum.x = UniformInBall(d, 1.0, rng);
        const double prob = 1.0 / (1.0 + std::exp(-truth.dot(datum.x)));
        datum.y = rng.Uniform() < prob ? 1.0 : -1.0;
        break;
      }
      case LossKind::kHinge: {
        datum.x = UniformInBall(d, 1.0, rng);
        double label = truth.dot(datum.x) >= 0.0 ? 1.0 : -1.0;
        if (rng.Uniform() < options.label_noise) label = -label;
        datum.y = label;
        break;
      }
    }
    out.data.push_back(std::move(datum));
  }
  if (kind != LossKind::kHinge) out.population_minimizer = truth;
  return out;
}

std::unique_ptr<LossModel> MakeLoss(LossKind kind, const Ball& space,
                                    const SynthOptions& options) {
  switch (kind) {
    case LossKind::kQuadratic:
      return std::make_unique<QuadraticLoss>(space.diameter() +
                                             options.data_radius);
    case LossKind::kLogistic:
      return std::make_unique<LogisticLoss>();
    case LossKind::kHinge:
      return std::make_unique<HingeLoss>();
    case LossKind::kAbsolute:
      return std::make_unique<AbsoluteLoss>();
  }
  throw std::invalid_argument("unknown loss kind");
}

double EmpiricalLoss(const LossModel& loss, const Vec& theta,
                     std::span<const Datum> data) {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const Datum& x : data) total += loss.Value(theta, x);
  return total / static_cast<double>(data.size());
}

PopulationObjective PopulationObjective::Build(
    LossKind kind, const LossModel& loss, const Ball& space, std::size_t d,
    const SynthOptions& options, SeededRng& rng, std::size_t eval_size) {
  PopulationObjective obj;
  obj.kind_ = kind;
  obj.loss_ = &loss;
  obj.truth_ = TruthFor(kind, d, options);
  if (kind == LossKind::kQuadratic) {
    // E|x - truth|^2 = r^2 d / (d + 2) for x uniform in a ball of radius r.
    const double r = options.data_radius;
    const double dd = static_cast<double>(d);
    obj.quadratic_offset_ = 0.5 * r * r * dd / (dd + 2.0);
    obj.minimizer_ = ProjectToBall(obj.truth_, space);
    obj.min_value_ = obj.Loss(obj.minimizer_);
    return obj;
  }
  obj.eval_ = SynthData(kind, eval_size, d, rng, options).data;
  if (kind != LossKind::kHinge && space.Contains(obj.truth_)) {
    obj.minimizer_ = obj.truth_;
  } else {
    // Projected subgradient descent on the evaluation sample, best iterate.
    Vec theta = space.center();
    Vec best = theta;
    double best_value = obj.Loss(theta);
    for (int k = 1; k <= kHingeReferenceIterations; ++k) {
      Vec grad = Vec::Zero(d);
      for (const Datum& x : obj.eval_) grad += loss.Gradient(theta, x);
      grad /= static_cast<double>(obj.eval_.size());
      const double eta =
          space.diameter() / (loss.lipschitz() * std::sqrt(static_cast<double>(k)));
      theta = ProjectToBall(theta - eta * grad, space);
      const double value = obj.Loss(theta);
      if (value < best_value) {
        best_value = value;
        best = theta;
      }
    }
    obj.minimizer_ = best;
  }
  obj.min_value_ = obj.Loss(obj.minimizer_);
  return obj;
}

double PopulationObjective::Loss(const Vec& theta) const {
  if (kind_ == LossKind::kQuadratic) {
    return 0.5 * (theta - truth_).squaredNorm() + quadratic_offset_;
  }
  return EmpiricalLoss(*loss_, theta, eval_);
}

}  // namespace shuffle_sco
