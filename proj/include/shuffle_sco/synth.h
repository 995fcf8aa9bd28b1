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

#ifndef SHUFFLE_SCO_SYNTH_H_
#define SHUFFLE_SCO_SYNTH_H_

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "shuffle_sco/core.h"
#include "shuffle_sco/losses.h"
#include "shuffle_sco/rng.h"

namespace shuffle_sco {

enum class LossKind { kQuadratic, kLogistic, kHinge, kAbsolute };

// Throws std::invalid_argument on an unknown name.
LossKind ParseLossKind(std::string_view name);
std::string ToString(LossKind kind);

// Generating distributions:
//   quadratic  x = truth + data_radius * U, U uniform in the unit ball
//   absolute   same as quadratic; the population minimizer is truth by symmetry
//   logistic   a uniform in the unit ball, y = +1 with prob sigmoid(<truth, a>)
//   hinge      a uniform in the unit ball, y = sign(<truth, a>) flipped with
//              prob label_noise; no closed-form minimizer
struct SynthOptions {
  Vec truth;  // empty: zero for quadratic/absolute, 0.5 * ones/sqrt(d) otherwise
  double data_radius = 1.0;
  double label_noise = 0.1;
};

struct SynthSample {
  Dataset data;
  std::optional<Vec> population_minimizer;
};

Vec UniformInBall(std::size_t d, double radius, SeededRng& rng);

Vec DefaultTruth(LossKind kind, std::size_t d);

SynthSample SynthData(LossKind kind, std::size_t n, std::size_t d,
                      SeededRng& rng, const SynthOptions& options = {});

// Loss with constants matching the generating distribution. The quadratic
// Lipschitz bound is D + data_radius, valid when truth lies in the ball.
std::unique_ptr<LossModel> MakeLoss(LossKind kind, const Ball& space,
                                    const SynthOptions& options = {});

// Population loss over the ball. Exact for quadratic; otherwise estimated on a
// fresh evaluation sample, with the minimum taken at the known minimizer or,
// for hinge, at a long projected-subgradient reference solve.
class PopulationObjective {
 public:
  static PopulationObjective Build(LossKind kind, const LossModel& loss,
                                   const Ball& space, std::size_t d,
                                   const SynthOptions& options, SeededRng& rng,
                                   std::size_t eval_size = 100000);

  double Loss(const Vec& theta) const;
  double Excess(const Vec& theta) const { return Loss(theta) - min_value_; }
  double MinValue() const { return min_value_; }
  const Vec& Minimizer() const { return minimizer_; }

 private:
  PopulationObjective() = default;

  LossKind kind_ = LossKind::kQuadratic;
  const LossModel* loss_ = nullptr;
  Vec truth_;
  double quadratic_offset_ = 0.0;
  Dataset eval_;
  Vec minimizer_;
  double min_value_ = 0.0;
};

double EmpiricalLoss(const LossModel& loss, const Vec& theta,
                     std::span<const Datum> data);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_SYNTH_H_
