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

#ifndef SHUFFLE_SCO_PAN_H_
#define SHUFFLE_SCO_PAN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "shuffle_sco/core.h"
#include "shuffle_sco/losses.h"
#include "shuffle_sco/optimize.h"
#include "shuffle_sco/rng.h"

namespace shuffle_sco {

// Identifies one Gaussian draw: the batch it belongs to and whether it was
// added when the gradient estimate was initialized or after the batch.
enum class NoiseLine { kInit = 5, kPostBatch = 9 };

struct NoiseTag {
  std::uint64_t batch = 0;
  NoiseLine line = NoiseLine::kInit;
  bool operator==(const NoiseTag&) const = default;
};

struct NoiseDraw {
  NoiseTag tag;
  Vec value;
};

// Internal state (theta, theta_ag, theta_md, g_bar) plus bookkeeping of which
// noise draws it depends on.
struct PanState {
  std::uint64_t batch = 0;  // current batch t; 0 before the first
  std::uint64_t read = 0;   // elements of the current batch read so far
  bool in_batch = false;
  Vec theta;
  Vec ag;
  Vec md;
  Vec gbar;
  std::vector<NoiseTag> gbar_noise;
  std::vector<NoiseTag> theta_noise;
};

struct PanOptions {
  bool add_noise = true;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::optional<double> sigma;
  std::optional<double> schedule_smoothness;
  Vec initial;
};

// zeta^2 = 8 L^2 ln(2/delta) / (b^2 eps^2).
double PanNoiseVariance(double lipschitz, std::uint64_t batch,
                        const PrivacyBudget& budget);

// Online AC-SA over a stream of n elements in batches of b, with Gaussian
// noise added when each batch's gradient estimate is initialized and again
// after its last element. Requires eps < 1 and delta < 1.
class PanPrivateAcsa {
 public:
  PanPrivateAcsa(const LossModel& loss, Ball space, const PrivacyBudget& budget,
                 std::uint64_t batch, std::uint64_t stream_length,
                 PanOptions options = {});

  // Reads one element, opening and closing batches as needed. Elements past
  // the last full batch are ignored.
  void Observe(const Datum& x);

  void BeginBatch();
  void Read(const Datum& x);
  void EndBatch();

  bool Done() const { return state_.batch == rounds_ && !state_.in_batch; }
  const PanState& Snapshot() const { return state_; }
  const Vec& Output() const { return state_.ag; }

  std::uint64_t rounds() const { return rounds_; }
  std::uint64_t batch() const { return batch_; }
  double zeta2() const { return zeta2_; }
  const ScheduleACSA& schedule() const { return schedule_; }
  const std::vector<NoiseDraw>& noise_log() const { return noise_log_; }

 private:
  Vec DrawNoise(NoiseLine line);

  const LossModel* loss_;
  Ball space_;
  std::uint64_t batch_;
  std::uint64_t rounds_;
  double zeta2_;
  PanOptions options_;
  ScheduleACSA schedule_;
  std::optional<SeededRng> rng_;
  PanState state_;
  std::vector<NoiseDraw> noise_log_;
};

RunReport RunPanAcsa(const LossModel& loss, std::span<const Datum> data,
                     const PrivacyBudget& budget, const Ball& space,
                     std::uint64_t batch, const PanOptions& options = {});

// State after element `index` of batch `batch_index` has been read and before
// the post-batch noise. batch_index 0 (with index 0) is the initial state;
// batch_index T + 1 (with index 0) is the state after the final batch.
PanState IntrusionSnapshot(const LossModel& loss, std::span<const Datum> data,
                           const PrivacyBudget& budget, const Ball& space,
                           std::uint64_t batch, const PanOptions& options,
                           std::uint64_t batch_index, std::uint64_t index);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_PAN_H_
