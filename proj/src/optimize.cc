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

#include "shuffle_sco/optimize.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shuffle_sco {

namespace {

constexpr double kGradientSlack = 1e-9;
constexpr std::uint64_t kPhaseStreamStride = std::uint64_t{1} << 32;

Vec InitialPoint(const Ball& space, const RunOptions& options) {
  if (options.initial.size() == 0) return space.center();
  if (options.initial.size() != space.dim()) {
    throw std::invalid_argument("initial point: dimension mismatch");
  }
  return ProjectToBall(options.initial, space);
}

void CheckGradient(const Vec& grad, double cap) {
  if (grad.norm() > cap * (1.0 + kGradientSlack)) {
    throw std::runtime_error(
        "gradient norm exceeds the declared Lipschitz bound");
  }
}

RoundRecord* BeginRecord(const RunOptions& options, std::uint64_t round,
                         UserRange users, std::uint64_t stream,
                         const Vec& query, RoundRecord& scratch) {
  if (options.transcript == nullptr) return nullptr;
  scratch = RoundRecord{};
  scratch.round = round;
  scratch.users = users;
  scratch.seed = options.seed;
  scratch.stream = stream;
  scratch.query_point = query;
  scratch.noise_mode = options.noise_mode;
  return &scratch;
}

void CommitRecord(const RunOptions& options, RoundRecord* record) {
  if (record != nullptr) options.transcript->rounds.push_back(*record);
}

void MaybeTrajectory(const RunOptions& options, std::uint64_t t,
                     const Vec& theta, RunReport& report) {
  if (options.evaluator != nullptr && options.trajectory_stride > 0 &&
      t % options.trajectory_stride == 0) {
    report.trajectory.push_back(options.evaluator->Excess(theta));
  }
}

CertificateReport SequentialCertificate(const PrivacyBudget& budget,
                                        const VectorSumParams& vec,
                                        std::uint64_t rounds) {
  CertificateReport cert;
  cert.claimed = budget;
  cert.per_round = vec.budget;
  cert.rounds = rounds;
  cert.mode = Interactivity::kSequential;
  // Disjoint batches: every user is covered by exactly one round's guarantee.
  cert.composed = vec.budget;
  cert.within_claim = cert.composed.epsilon <= budget.epsilon &&
                      cert.composed.delta <= budget.delta;
  return cert;
}

void RequireData(std::span<const Datum> data, const Ball& space) {
  if (data.size() < 2) {
    throw std::invalid_argument("optimizer: at least 2 users are required");
  }
  for (const Datum& x : data) {
    if (x.x.size() != space.dim()) {
      throw std::invalid_argument("optimizer: data dimension mismatch");
    }
  }
}

}  // namespace

ScheduleACSA::ScheduleACSA(std::uint64_t rounds, double sigma,
                           double diameter, double smoothness)
    : rounds_(rounds),
      sigma_(sigma),
      diameter_(diameter),
      smoothness_(smoothness) {
  if (rounds == 0) throw std::invalid_argument("schedule: T must be >= 1");
  if (!(sigma >= 0.0) || !(diameter > 0.0) || !(smoothness >= 0.0)) {
    throw std::invalid_argument("schedule: invalid constants");
  }
}

double ScheduleACSA::alpha(std::uint64_t t) const {
  return 2.0 / (static_cast<double>(t) + 2.0);
}

double ScheduleACSA::L(std::uint64_t t) const {
  const double big_t = static_cast<double>(rounds_);
  return (std::pow(big_t + 2.0, 1.5) * sigma_ / diameter_ + smoothness_) /
         (static_cast<double>(t) + 1.0);
}

std::uint64_t ClampBatch(double batch, std::uint64_t n,
                         std::vector<std::string>* warnings) {
  if (n < 2) throw std::invalid_argument("batch size: requires n >= 2");
  const std::uint64_t upper = n / 2;
  const double rounded = std::round(batch);
  if (!(rounded >= 1.0)) {
    if (warnings) warnings->push_back("batch size clamped up to 1");
    return 1;
  }
  if (rounded > static_cast<double>(upper)) {
    if (warnings) {
      warnings->push_back("batch size " + std::to_string(rounded) +
                          " clamped to n/2 = " + std::to_string(upper));
    }
    return upper;
  }
  return static_cast<std::uint64_t>(rounded);
}

double OracleVarianceBound(double lipschitz, const VectorSumParams& vec,
                           std::uint64_t batch) {
  const double b = static_cast<double>(batch);
  return lipschitz * lipschitz / b +
         static_cast<double>(vec.dim) * WorstCaseCoordinateVariance(vec, batch) /
             (b * b);
}

SgdPlan PlanSgd(const LossModel& loss, std::uint64_t n, std::uint64_t d,
                const PrivacyBudget& budget, const Ball& space,
                const RunOptions& options) {
  RequireValidBudget(budget);
  SgdPlan plan;
  const double dd = static_cast<double>(d);
  const double L = loss.lipschitz();
  const double log_term = std::log(dd / budget.delta);
  const double formula = std::sqrt(dd) * log_term / budget.epsilon;
  plan.batch = options.batch_size ? *options.batch_size
                                  : ClampBatch(formula, n, &plan.warnings);
  if (plan.batch < 1 || 2 * plan.batch > n) {
    throw std::invalid_argument("P_SGD: requires n >= 2b");
  }
  plan.rounds = n / plan.batch;
  const double b = static_cast<double>(plan.batch);
  plan.step = budget.epsilon * b * space.diameter() /
              (L * std::sqrt(static_cast<double>(plan.rounds)) *
               (budget.epsilon * b + std::sqrt(dd) * L * log_term));
  plan.vec = SelectVectorSumParams(plan.batch, d, L, budget);
  return plan;
}

AcsaPlan PlanAcsa(const LossModel& loss, std::uint64_t n, std::uint64_t d,
                  const PrivacyBudget& budget, const Ball& space,
                  const RunOptions& options) {
  RequireValidBudget(budget);
  const std::optional<double> beta = loss.smoothness();
  if (!beta) throw std::invalid_argument("AC-SA requires a smooth loss");
  AcsaPlan plan;
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double L = loss.lipschitz();
  const double D = space.diameter();
  const double formula =
      std::pow(nd, 0.6) * std::pow(dd, 0.2) * std::pow(L, 0.4) *
      std::pow(std::log(dd / budget.delta), 0.4) /
      (std::pow(budget.epsilon, 0.4) * std::pow(*beta, 0.4) * std::pow(D, 0.4));
  plan.batch = options.batch_size ? *options.batch_size
                                  : ClampBatch(formula, n, &plan.warnings);
  if (plan.batch < 1 || 2 * plan.batch > n) {
    throw std::invalid_argument("P_AGD: requires n >= 2b");
  }
  plan.rounds = n / plan.batch;
  plan.vec = SelectVectorSumParams(plan.batch, d, L, budget);
  const double b = static_cast<double>(plan.batch);
  if (options.sigma) {
    plan.sigma = *options.sigma;
  } else if (options.add_noise) {
    plan.sigma = std::sqrt(OracleVarianceBound(L, plan.vec, plan.batch));
  } else {
    plan.sigma = L / std::sqrt(b);
  }
  plan.smoothness = options.schedule_smoothness ? *options.schedule_smoothness
                                                : 2.0 * *beta;
  return plan;
}

FipPlan PlanFip(const LossModel& loss, std::uint64_t n, std::uint64_t d,
                const PrivacyBudget& budget, const Ball& space,
                const RunOptions& options) {
  RequireValidBudget(budget);
  if (n < 1) throw std::invalid_argument("P_GD: requires n >= 1");
  FipPlan plan;
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  const double L = loss.lipschitz();
  if (options.rounds) {
    plan.rounds = *options.rounds;
    if (plan.rounds < 1) throw std::invalid_argument("P_GD: T must be >= 1");
  } else {
    const double log_term = std::log(nd * dd / budget.delta);
    const double formula = std::floor(
        std::min(nd, budget.epsilon * budget.epsilon * nd * nd /
                         (dd * log_term * log_term)));
    if (formula < 1.0) {
      plan.warnings.push_back("P_GD: T formula below 1, clamped to 1");
      plan.rounds = 1;
    } else {
      plan.rounds = static_cast<std::uint64_t>(formula);
    }
  }
  plan.step =
      space.diameter() / (L * std::sqrt(static_cast<double>(plan.rounds)));
  if (const std::optional<double> beta = loss.smoothness()) {
    if (plan.step > 2.0 / *beta) {
      plan.warnings.push_back("P_GD: step clamped to 2/beta");
      plan.step = 2.0 / *beta;
    }
  }
  plan.round_budget = FipRoundBudget(budget, plan.rounds);
  plan.vec = SelectVectorSumParams(n, d, L, plan.round_budget);
  return plan;
}

double SmoothedAcsaBeta(double lipschitz, std::uint64_t n, std::uint64_t d,
                        const PrivacyBudget& budget, double diameter) {
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return std::pow(budget.epsilon, 2.0 / 3.0) * std::pow(nd, 2.0 / 3.0) *
         lipschitz /
         (std::cbrt(dd) * diameter *
          std::pow(std::log(dd / budget.delta), 2.0 / 3.0));
}

double SmoothedFipBeta(double lipschitz, std::uint64_t n, std::uint64_t d,
                       const PrivacyBudget& budget, double diameter) {
  const double nd = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  return lipschitz / diameter *
         std::min(std::sqrt(nd),
                  budget.epsilon * nd /
                      (std::sqrt(dd) *
                       std::pow(std::log(nd * dd / budget.delta), 1.5)));
}

std::uint64_t StronglyConvexPhases(std::uint64_t n) {
  const double m = static_cast<double>(std::max<std::uint64_t>(n, 4));
  const double k = std::ceil(std::log2(std::log2(m)));
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(k));
}

Vec PrivateBatchGradient(const LossModel& loss, const Vec& theta,
                         std::span<const Datum> batch,
                         const VectorSumParams& vec, bool add_noise,
                         NoiseMode mode, SeededRng& rng,
                         RoundRecord* record) {
  if (batch.empty()) throw std::invalid_argument("batch gradient: empty batch");
  const double b = static_cast<double>(batch.size());
  if (record != nullptr) {
    record->params = vec.per_coord;
    record->dim = vec.dim;
    record->l2_cap = vec.l2_cap;
  }
  if (!add_noise) {
    Vec g = Vec::Zero(theta.size());
    for (const Datum& x : batch) {
      const Vec grad = loss.Gradient(theta, x);
      CheckGradient(grad, vec.l2_cap);
      g += grad / b;
    }
    if (record != nullptr) record->randomizer = "exact";
    return g;
  }
  std::vector<Vec> grads;
  grads.reserve(batch.size());
  for (const Datum& x : batch) {
    grads.push_back(loss.Gradient(theta, x));
    CheckGradient(grads.back(), vec.l2_cap);
  }
  const VectorSumReport report = RunVectorSum(grads, vec, rng, mode);
  if (record != nullptr) {
    record->randomizer = "vector_sum";
    record->noise_mode = mode;
    for (const ShuffledView& v : report.views) {
      record->ones_counts.push_back(v.ones_count);
    }
  }
  return AnalyzeVector(report, vec) / b;
}

RoundRecord ReplayRound(const LossModel& loss, std::span<const Datum> data,
                        const RoundRecord& record) {
  if (record.users.begin >= record.users.end ||
      record.users.end > data.size()) {
    throw std::invalid_argument("replay: user range outside the data");
  }
  VectorSumParams vec;
  vec.dim = record.dim;
  vec.l2_cap = record.l2_cap;
  vec.users = record.users.size();
  vec.per_coord = record.params;
  RoundRecord out = record;
  out.ones_counts.clear();
  SeededRng rng(record.seed, record.stream);
  PrivateBatchGradient(loss, record.query_point,
                       data.subspan(record.users.begin, record.users.size()),
                       vec, record.randomizer != "exact", record.noise_mode,
                       rng, &out);
  return out;
}

RunReport RunSgd(const LossModel& loss, std::span<const Datum> data,
                 const PrivacyBudget& budget, const Ball& space,
                 const RunOptions& options) {
  RequireData(data, space);
  const SgdPlan plan =
      PlanSgd(loss, data.size(), space.dim(), budget, space, options);
  RunReport report;
  report.warnings = plan.warnings;
  report.seed = options.seed;
  report.stream = options.stream;
  report.step_size = plan.step;
  report.rounds = plan.rounds;

  Vec theta = InitialPoint(space, options);
  Vec sum = Vec::Zero(space.dim());
  RoundRecord scratch;
  for (std::uint64_t t = 1; t <= plan.rounds; ++t) {
    const std::uint64_t begin = (t - 1) * plan.batch;
    const std::span<const Datum> batch = data.subspan(begin, plan.batch);
    SeededRng rng(options.seed, options.stream + t);
    RoundRecord* rec = BeginRecord(
        options, t,
        {options.user_offset + begin, options.user_offset + begin + plan.batch},
        options.stream + t, theta, scratch);
    const Vec g = PrivateBatchGradient(loss, theta, batch, plan.vec,
                                       options.add_noise, options.noise_mode,
                                       rng, rec);
    CommitRecord(options, rec);
    sum += theta;
    theta = ProjectToBall(theta - plan.step * g, space);
    report.batch_sizes.push_back(plan.batch);
    MaybeTrajectory(options, t, theta, report);
  }
  report.theta = sum / static_cast<double>(plan.rounds);
  report.certificate = SequentialCertificate(budget, plan.vec, plan.rounds);
  report.empirical_loss = EmpiricalLoss(loss, report.theta, data);
  return report;
}

RunReport RunAcsa(const LossModel& loss, std::span<const Datum> data,
                  const PrivacyBudget& budget, const Ball& space,
                  const RunOptions& options) {
  RequireData(data, space);
  const AcsaPlan plan =
      PlanAcsa(loss, data.size(), space.dim(), budget, space, options);
  const ScheduleACSA schedule(plan.rounds, plan.sigma, space.diameter(),
                              plan.smoothness);
  RunReport report;
  report.warnings = plan.warnings;
  report.seed = options.seed;
  report.stream = options.stream;
  report.rounds = plan.rounds;

  Vec theta = InitialPoint(space, options);
  Vec ag = theta;
  Vec md = theta;
  RoundRecord scratch;
  for (std::uint64_t t = 1; t <= plan.rounds; ++t) {
    const double alpha = schedule.alpha(t);
    if (t > 1) md = alpha * theta + (1.0 - alpha) * ag;
    const std::uint64_t begin = (t - 1) * plan.batch;
    const std::span<const Datum> batch = data.subspan(begin, plan.batch);
    SeededRng rng(options.seed, options.stream + t);
    RoundRecord* rec = BeginRecord(
        options, t,
        {options.user_offset + begin, options.user_offset + begin + plan.batch},
        options.stream + t, md, scratch);
    const Vec g = PrivateBatchGradient(loss, md, batch, plan.vec,
                                       options.add_noise, options.noise_mode,
                                       rng, rec);
    CommitRecord(options, rec);
    theta = ProjectToBall(theta - g / schedule.L(t), space);
    ag = alpha * theta + (1.0 - alpha) * ag;
    report.batch_sizes.push_back(plan.batch);
    MaybeTrajectory(options, t, ag, report);
  }
  report.theta = ag;
  report.certificate = SequentialCertificate(budget, plan.vec, plan.rounds);
  report.empirical_loss = EmpiricalLoss(loss, report.theta, data);
  return report;
}

RunReport RunSmoothedAcsa(const LossModel& loss, std::span<const Datum> data,
                          const PrivacyBudget& budget, const Ball& space,
                          const RunOptions& options) {
  RequireValidBudget(budget);
  const double beta =
      options.smoothing_beta
          ? *options.smoothing_beta
          : SmoothedAcsaBeta(loss.lipschitz(), data.size(), space.dim(),
                             budget, space.diameter());
  const EnvelopeLoss envelope(MoreauEnvelope(loss, space, beta));
  RunReport report = RunAcsa(envelope, data, budget, space, options);
  report.envelope_beta = beta;
  report.envelope_empirical_loss = report.empirical_loss;
  report.empirical_loss = EmpiricalLoss(loss, report.theta, data);
  return report;
}

namespace {

template <typename PhaseRunner>
RunReport RunPhases(const LossModel& loss, std::span<const Datum> data,
                    const PrivacyBudget& budget, const Ball& space,
                    const RunOptions& options, PhaseRunner run_phase) {
  const std::uint64_t n = data.size();
  const std::uint64_t k =
      options.phases ? *options.phases : StronglyConvexPhases(n);
  if (k < 1 || n < 2 * k) {
    throw std::invalid_argument("phase reduction: requires n >= 2k");
  }
  const std::uint64_t group = n / k;
  RunReport report;
  report.seed = options.seed;
  report.stream = options.stream;
  Vec start = InitialPoint(space, options);
  for (std::uint64_t j = 0; j < k; ++j) {
    RunOptions phase = options;
    phase.initial = start;
    phase.user_offset = options.user_offset + j * group;
    phase.stream = options.stream + j * kPhaseStreamStride;
    phase.phases.reset();
    RunReport r = run_phase(data.subspan(j * group, group), phase);
    start = r.theta;
    report.rounds += r.rounds;
    report.batch_sizes.insert(report.batch_sizes.end(), r.batch_sizes.begin(),
                              r.batch_sizes.end());
    report.trajectory.insert(report.trajectory.end(), r.trajectory.begin(),
                             r.trajectory.end());
    report.warnings.insert(report.warnings.end(), r.warnings.begin(),
                           r.warnings.end());
    report.phase_outputs.push_back(r.theta);
    if (options.evaluator != nullptr) {
      report.phase_excess.push_back(options.evaluator->Excess(r.theta));
    }
    report.envelope_beta = r.envelope_beta;
    report.step_size = r.step_size;
    if (j == 0) {
      report.certificate = r.certificate;
    } else {
      // Disjoint groups: the guarantee is the worst phase's guarantee.
      CertificateReport& c = report.certificate;
      c.composed.epsilon = std::max(c.composed.epsilon, r.certificate.composed.epsilon);
      c.composed.delta = std::max(c.composed.delta, r.certificate.composed.delta);
      c.rounds += r.certificate.rounds;
      c.within_claim = c.within_claim && r.certificate.within_claim;
    }
  }
  report.certificate.claimed = budget;
  report.theta = start;
  report.empirical_loss = EmpiricalLoss(loss, report.theta, data);
  return report;
}

}  // namespace

RunReport RunStronglyConvex(const LossModel& loss, std::span<const Datum> data,
                            const PrivacyBudget& budget, const Ball& space,
                            bool smooth, const RunOptions& options) {
  if (!loss.strong_convexity()) {
    throw std::invalid_argument("phase reduction requires a strongly convex loss");
  }
  return RunPhases(loss, data, budget, space, options,
                   [&](std::span<const Datum> group, const RunOptions& phase) {
                     return smooth ? RunAcsa(loss, group, budget, space, phase)
                                   : RunSmoothedAcsa(loss, group, budget, space,
                                                     phase);
                   });
}

namespace {

RunReport RunFipSingle(const LossModel& loss, std::span<const Datum> data,
                       const PrivacyBudget& budget, const Ball& space,
                       const RunOptions& options) {
  if (data.empty()) throw std::invalid_argument("P_GD: no users");
  for (const Datum& x : data) {
    if (x.x.size() != space.dim()) {
      throw std::invalid_argument("optimizer: data dimension mismatch");
    }
  }
  RequireValidBudget(budget);
  std::optional<EnvelopeLoss> envelope;
  const LossModel* target = &loss;
  RunReport report;
  std::vector<std::string> warnings;
  if (!loss.smoothness()) {
    double beta = options.smoothing_beta
                      ? *options.smoothing_beta
                      : SmoothedFipBeta(loss.lipschitz(), data.size(),
                                        space.dim(), budget, space.diameter());
    // The envelope is 2L-Lipschitz, so its step is half the base step.
    const double step =
        PlanFip(loss, data.size(), space.dim(), budget, space, options).step /
        2.0;
    if (step > 2.0 / beta) {
      beta = 2.0 / step;
      warnings.push_back("P_GD: envelope beta lowered to 2/eta");
    }
    envelope.emplace(MoreauEnvelope(loss, space, beta));
    target = &*envelope;
    report.envelope_beta = beta;
  }
  const FipPlan plan =
      PlanFip(*target, data.size(), space.dim(), budget, space, options);
  report.warnings = plan.warnings;
  report.warnings.insert(report.warnings.end(), warnings.begin(),
                         warnings.end());
  report.seed = options.seed;
  report.stream = options.stream;
  report.rounds = plan.rounds;
  report.step_size = plan.step;

  const UserRange everyone{options.user_offset,
                           options.user_offset + data.size()};
  Vec theta = InitialPoint(space, options);
  Vec sum = Vec::Zero(space.dim());
  RoundRecord scratch;
  for (std::uint64_t t = 1; t <= plan.rounds; ++t) {
    SeededRng rng(options.seed, options.stream + t);
    RoundRecord* rec = BeginRecord(options, t, everyone, options.stream + t,
                                   theta, scratch);
    const Vec g = PrivateBatchGradient(*target, theta, data, plan.vec,
                                       options.add_noise, options.noise_mode,
                                       rng, rec);
    CommitRecord(options, rec);
    sum += theta;
    theta = ProjectToBall(theta - plan.step * g, space);
    report.batch_sizes.push_back(data.size());
    MaybeTrajectory(options, t, theta, report);
  }
  report.theta = sum / static_cast<double>(plan.rounds);

  CertificateReport& cert = report.certificate;
  cert.claimed = budget;
  cert.per_round = plan.round_budget;
  cert.rounds = plan.rounds;
  cert.mode = Interactivity::kFull;
  CompositionInput input;
  input.per_coordinate.assign(plan.rounds, plan.round_budget);
  input.gamma = budget.delta / (static_cast<double>(plan.rounds) + 1.0);
  cert.composed = ComposePerInstance(input);
  // delta' sums T + 1 copies of delta / (T + 1); allow for its rounding.
  cert.within_claim = cert.composed.epsilon <= budget.epsilon &&
                      cert.composed.delta <= budget.delta * (1.0 + 1e-12);

  report.empirical_loss = EmpiricalLoss(loss, report.theta, data);
  if (envelope) {
    report.envelope_empirical_loss = EmpiricalLoss(*envelope, report.theta, data);
  }
  return report;
}

}  // namespace

RunReport RunFipGd(const LossModel& loss, std::span<const Datum> data,
                   const PrivacyBudget& budget, const Ball& space,
                   bool strongly_convex, const RunOptions& options) {
  if (options.transcript != nullptr) {
    options.transcript->mode = Interactivity::kFull;
  }
  if (!strongly_convex) {
    return RunFipSingle(loss, data, budget, space, options);
  }
  if (!loss.strong_convexity()) {
    throw std::invalid_argument("phase reduction requires a strongly convex loss");
  }
  return RunPhases(loss, data, budget, space, options,
                   [&](std::span<const Datum> group, const RunOptions& phase) {
                     return RunFipSingle(loss, group, budget, space, phase);
                   });
}

}  // namespace shuffle_sco
