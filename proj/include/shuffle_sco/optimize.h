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

#ifndef SHUFFLE_SCO_OPTIMIZE_H_
#define SHUFFLE_SCO_OPTIMIZE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shuffle_sco/accountant.h"
#include "shuffle_sco/core.h"
#include "shuffle_sco/losses.h"
#include "shuffle_sco/rng.h"
#include "shuffle_sco/scalar_sum.h"
#include "shuffle_sco/synth.h"
#include "shuffle_sco/transcript.h"
#include "shuffle_sco/vector_sum.h"

namespace shuffle_sco {

struct RunOptions {
  // false disables privacy noise; gradients are then averaged exactly.
  bool add_noise = true;
  NoiseMode noise_mode = NoiseMode::kPooled;
  std::uint64_t seed = 0;
  // Round t draws from SeededRng(seed, stream + t).
  std::uint64_t stream = 0;
  // Global index of data[0], used for transcript user ranges.
  std::uint64_t user_offset = 0;
  Transcript* transcript = nullptr;

  std::optional<std::uint64_t> batch_size;
  std::optional<std::uint64_t> rounds;
  std::optional<std::uint64_t> phases;
  std::optional<double> smoothing_beta;
  std::optional<double> schedule_smoothness;
  std::optional<double> sigma;
  Vec initial;  // empty: center of the parameter ball

  // Optional excess-loss trajectory, sampled every `trajectory_stride` rounds.
  const PopulationObjective* evaluator = nullptr;
  std::uint64_t trajectory_stride = 0;
};

struct CertificateReport {
  PrivacyBudget claimed;
  PrivacyBudget per_round;
  std::uint64_t rounds = 0;
  Interactivity mode = Interactivity::kSequential;
  PrivacyBudget composed;
  bool within_claim = false;
};

struct RunReport {
  Vec theta;
  std::vector<double> trajectory;
  CertificateReport certificate;
  std::uint64_t rounds = 0;
  std::vector<std::uint64_t> batch_sizes;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  double step_size = 0.0;
  std::optional<double> envelope_beta;
  double empirical_loss = 0.0;
  std::optional<double> envelope_empirical_loss;
  std::vector<Vec> phase_outputs;
  std::vector<double> phase_excess;
  std::vector<std::string> warnings;
};

// Step-size schedule of accelerated stochastic approximation:
//   alpha_t = 2 / (t + 2),  L_t = ((T + 2)^{3/2} sigma / D + beta) / (t + 1).
class ScheduleACSA {
 public:
  ScheduleACSA(std::uint64_t rounds, double sigma, double diameter,
               double smoothness);

  double alpha(std::uint64_t t) const;
  double L(std::uint64_t t) const;
  std::uint64_t rounds() const { return rounds_; }

 private:
  std::uint64_t rounds_;
  double sigma_;
  double diameter_;
  double smoothness_;
};

// Round a real-valued batch size, clamp to [1, n/2]. Throws when n < 2.
std::uint64_t ClampBatch(double batch, std::uint64_t n,
                         std::vector<std::string>* warnings);

struct SgdPlan {
  std::uint64_t batch = 1;
  std::uint64_t rounds = 1;
  double step = 0.0;
  VectorSumParams vec;
  std::vector<std::string> warnings;
};

// b = sqrt(d) ln(d/delta) / eps, T = floor(n / b),
// eta = eps b D / (L sqrt(T) (eps b + sqrt(d) L ln(d/delta))).
SgdPlan PlanSgd(const LossModel& loss, std::uint64_t n, std::uint64_t d,
                const PrivacyBudget& budget, const Ball& space,
                const RunOptions& options = {});

struct AcsaPlan {
  std::uint64_t batch = 1;
  std::uint64_t rounds = 1;
  double sigma = 0.0;
  double smoothness = 0.0;  // as used by the schedule
  VectorSumParams vec;
  std::vector<std::string> warnings;
};

// b = n^{3/5} d^{1/5} L^{2/5} ln^{2/5}(d/delta) / (eps^{2/5} beta^{2/5} D^{2/5}),
// sigma^2 = L^2 / b + d * worst-case coordinate variance / b^2. The schedule
// is instantiated with smoothness 2 beta, which keeps L_t >= beta alpha_t.
AcsaPlan PlanAcsa(const LossModel& loss, std::uint64_t n, std::uint64_t d,
                  const PrivacyBudget& budget, const Ball& space,
                  const RunOptions& options = {});

struct FipPlan {
  std::uint64_t rounds = 1;
  double step = 0.0;
  PrivacyBudget round_budget;
  VectorSumParams vec;
  std::vector<std::string> warnings;
};

// T = floor(min(n, eps^2 n^2 / (d ln^2(n d / delta)))), eta = D / (L sqrt(T)),
// per-round budget from FipRoundBudget. The loss passed in must be smooth.
FipPlan PlanFip(const LossModel& loss, std::uint64_t n, std::uint64_t d,
                const PrivacyBudget& budget, const Ball& space,
                const RunOptions& options = {});

// Envelope parameters used by the smoothed variants.
double SmoothedAcsaBeta(double lipschitz, std::uint64_t n, std::uint64_t d,
                        const PrivacyBudget& budget, double diameter);
double SmoothedFipBeta(double lipschitz, std::uint64_t n, std::uint64_t d,
                       const PrivacyBudget& budget, double diameter);

// k = max(1, ceil(log2 log2 max(n, 4))).
std::uint64_t StronglyConvexPhases(std::uint64_t n);

// sigma^2 bound L^2 / b + d * worst-case coordinate variance / b^2 of the
// private mini-batch gradient.
double OracleVarianceBound(double lipschitz, const VectorSumParams& vec,
                           std::uint64_t batch);

// (1/b) P_vec(grad l(theta, x_1), ..., grad l(theta, x_b)). Without noise,
// the exact running mean sum_i grad_i / b. Throws when a gradient norm exceeds
// the Lipschitz bound by more than 1e-9 relative. `record`, when given,
// receives the round's views.
Vec PrivateBatchGradient(const LossModel& loss, const Vec& theta,
                         std::span<const Datum> batch,
                         const VectorSumParams& vec, bool add_noise,
                         NoiseMode mode, SeededRng& rng,
                         RoundRecord* record = nullptr);

// Re-executes a recorded round from its seeds against the same loss and
// data (indexed by global user number). The returned record carries freshly
// computed views, which equal the recorded ones.
RoundRecord ReplayRound(const LossModel& loss, std::span<const Datum> data,
                        const RoundRecord& record);

RunReport RunSgd(const LossModel& loss, std::span<const Datum> data,
                 const PrivacyBudget& budget, const Ball& space,
                 const RunOptions& options = {});

RunReport RunAcsa(const LossModel& loss, std::span<const Datum> data,
                  const PrivacyBudget& budget, const Ball& space,
                  const RunOptions& options = {});

RunReport RunSmoothedAcsa(const LossModel& loss, std::span<const Datum> data,
                          const PrivacyBudget& budget, const Ball& space,
                          const RunOptions& options = {});

// Phase reduction: k disjoint groups of n/k users, each phase warm-started at
// the previous output over the fixed ball. `smooth` selects RunAcsa over
// RunSmoothedAcsa.
RunReport RunStronglyConvex(const LossModel& loss, std::span<const Datum> data,
                            const PrivacyBudget& budget, const Ball& space,
                            bool smooth, const RunOptions& options = {});

// Fully interactive gradient descent; every round queries all users. With
// `strongly_convex`, runs it over k disjoint groups in sequence.
RunReport RunFipGd(const LossModel& loss, std::span<const Datum> data,
                   const PrivacyBudget& budget, const Ball& space,
                   bool strongly_convex = false,
                   const RunOptions& options = {});

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_OPTIMIZE_H_
