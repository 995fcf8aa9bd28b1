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

#include "shuffle_sco/pan.h"

#include <cmath>
#include <stdexcept>

namespace shuffle_sco {

namespace {

void RequirePanBudget(const PrivacyBudget& budget) {
  if (!(budget.epsilon > 0.0 && budget.epsilon < 1.0)) {
    throw std::invalid_argument("pan-private AC-SA requires 0 < epsilon < 1");
  }
  if (!(budget.delta > 0.0 && budget.delta < 1.0)) {
    throw std::invalid_argument("pan-private AC-SA requires 0 < delta < 1");
  }
}

std::uint64_t PanRounds(std::uint64_t batch, std::uint64_t n) {
  if (batch < 1) throw std::invalid_argument("pan-private AC-SA: b >= 1");
  if (n < batch) {
    throw std::invalid_argument("pan-private AC-SA: stream shorter than b");
  }
  return n / batch;
}

double PanSigma(const LossModel& loss, std::uint64_t batch, double zeta2,
                const PanOptions& options, std::uint64_t dim) {
  if (options.sigma) return *options.sigma;
  const double L = loss.lipschitz();
  const double b = static_cast<double>(batch);
  const double noise = options.add_noise ? 2.0 * static_cast<double>(dim) * zeta2 : 0.0;
  return std::sqrt(L * L / b + noise);
}

double PanSmoothness(const LossModel& loss, const PanOptions& options) {
  if (options.schedule_smoothness) return *options.schedule_smoothness;
  const std::optional<double> beta = loss.smoothness();
  if (!beta) throw std::invalid_argument("pan-private AC-SA requires a smooth loss");
  return 2.0 * *beta;
}

}  // namespace

double PanNoiseVariance(double lipschitz, std::uint64_t batch,
                        const PrivacyBudget& budget) {
  const double b = static_cast<double>(batch);
  return 8.0 * lipschitz * lipschitz * std::log(2.0 / budget.delta) /
         (b * b * budget.epsilon * budget.epsilon);
}

PanPrivateAcsa::PanPrivateAcsa(const LossModel& loss, Ball space,
                               const PrivacyBudget& budget,
                               std::uint64_t batch,
                               std::uint64_t stream_length, PanOptions options)
    : loss_(&loss),
      space_(std::move(space)),
      batch_(batch),
      rounds_(PanRounds(batch, stream_length)),
      zeta2_((RequirePanBudget(budget),
              PanNoiseVariance(loss.lipschitz(), batch, budget))),
      options_(std::move(options)),
      schedule_(rounds_,
                PanSigma(loss, batch, zeta2_, options_, space_.dim()),
                space_.diameter(), PanSmoothness(loss, options_)) {
  if (options_.initial.size() == 0) {
    state_.theta = space_.center();
  } else {
    if (options_.initial.size() != space_.dim()) {
      throw std::invalid_argument("initial point: dimension mismatch");
    }
    state_.theta = ProjectToBall(options_.initial, space_);
  }
  state_.ag = state_.theta;
  state_.md = state_.theta;
  state_.gbar = Vec::Zero(space_.dim());
}

Vec PanPrivateAcsa::DrawNoise(NoiseLine line) {
  Vec z = Vec::Zero(space_.dim());
  if (options_.add_noise) {
    const double sd = std::sqrt(zeta2_);
    for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = rng_->Gaussian(sd);
  }
  noise_log_.push_back({{state_.batch, line}, z});
  return z;
}

void PanPrivateAcsa::BeginBatch() {
  if (state_.in_batch) throw std::logic_error("pan: batch already open");
  if (state_.batch == rounds_) throw std::logic_error("pan: stream exhausted");
  ++state_.batch;
  state_.read = 0;
  state_.in_batch = true;
  rng_.emplace(options_.seed, options_.stream + state_.batch);
  state_.gbar = DrawNoise(NoiseLine::kInit);
  state_.gbar_noise = {{state_.batch, NoiseLine::kInit}};
}

void PanPrivateAcsa::Read(const Datum& x) {
  if (!state_.in_batch) throw std::logic_error("pan: no open batch");
  if (state_.read == batch_) throw std::logic_error("pan: batch is full");
  const Vec grad = loss_->Gradient(state_.md, x);
  if (grad.norm() > loss_->lipschitz() * (1.0 + 1e-9)) {
    throw std::runtime_error("gradient norm exceeds the declared Lipschitz bound");
  }
  state_.gbar += grad / static_cast<double>(batch_);
  ++state_.read;
}

void PanPrivateAcsa::EndBatch() {
  if (!state_.in_batch || state_.read != batch_) {
    throw std::logic_error("pan: batch not complete");
  }
  const std::uint64_t t = state_.batch;
  state_.gbar += DrawNoise(NoiseLine::kPostBatch);
  state_.gbar_noise.push_back({t, NoiseLine::kPostBatch});
  const double alpha = schedule_.alpha(t);
  state_.theta =
      ProjectToBall(state_.theta - state_.gbar / schedule_.L(t), space_);
  state_.ag = alpha * state_.theta + (1.0 - alpha) * state_.ag;
  if (t < rounds_) {
    const double next = schedule_.alpha(t + 1);
    state_.md = next * state_.theta + (1.0 - next) * state_.ag;
  }
  state_.theta_noise.insert(state_.theta_noise.end(), state_.gbar_noise.begin(),
                            state_.gbar_noise.end());
  state_.in_batch = false;
}

void PanPrivateAcsa::Observe(const Datum& x) {
  if (Done()) return;
  if (!state_.in_batch) BeginBatch();
  Read(x);
  if (state_.read == batch_) EndBatch();
}

RunReport RunPanAcsa(const LossModel& loss, std::span<const Datum> data,
                     const PrivacyBudget& budget, const Ball& space,
                     std::uint64_t batch, const PanOptions& options) {
  PanPrivateAcsa run(loss, space, budget, batch, data.size(), options);
  for (const Datum& x : data) {
    if (x.x.size() != space.dim()) {
      throw std::invalid_argument("optimizer: data dimension mismatch");
    }
    run.Observe(x);
  }
  RunReport report;
  report.theta = run.Output();
  report.rounds = run.rounds();
  report.batch_sizes.assign(run.rounds(), batch);
  report.seed = options.seed;
  report.stream = options.stream;
  report.certificate.claimed = budget;
  report.certificate.per_round = budget;
  report.certificate.rounds = run.rounds();
  report.certificate.composed = budget;
  report.certificate.within_claim = true;
  report.empirical_loss = EmpiricalLoss(loss, report.theta, data);
  return report;
}

PanState IntrusionSnapshot(const LossModel& loss, std::span<const Datum> data,
                           const PrivacyBudget& budget, const Ball& space,
                           std::uint64_t batch, const PanOptions& options,
                           std::uint64_t batch_index, std::uint64_t index) {
  PanPrivateAcsa run(loss, space, budget, batch, data.size(), options);
  const std::uint64_t rounds = run.rounds();
  if (batch_index > rounds + 1 || index > batch ||
      ((batch_index == 0 || batch_index == rounds + 1) && index != 0)) {
    throw std::out_of_range("intrusion snapshot: position out of range");
  }
  const std::uint64_t full = batch_index == 0 ? 0 : std::min(batch_index - 1, rounds);
  std::uint64_t next = 0;
  for (std::uint64_t t = 0; t < full; ++t) {
    for (std::uint64_t i = 0; i < batch; ++i) run.Observe(data[next++]);
  }
  if (batch_index >= 1 && batch_index <= rounds) {
    run.BeginBatch();
    for (std::uint64_t i = 0; i < index; ++i) run.Read(data[next++]);
  }
  return run.Snapshot();
}

}  // namespace shuffle_sco
