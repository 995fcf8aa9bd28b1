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

#include "shuffle_sco/experiment.h"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "shuffle_sco/accountant.h"
#include "shuffle_sco/divergence.h"
#include "shuffle_sco/optimize.h"
#include "shuffle_sco/pan.h"
#include "shuffle_sco/robust.h"
#include "shuffle_sco/scalar_sum.h"
#include "shuffle_sco/vector_sum.h"

namespace shuffle_sco {

namespace {

using nlohmann::json;

constexpr std::uint64_t kDataStream = 1;
constexpr std::uint64_t kTrialStream = 2;
constexpr std::uint64_t kRunStream = std::uint64_t{1} << 40;
constexpr std::uint64_t kEvalSeed = 0xE7A1;
constexpr double kExactSupportLimit = 1e5;
constexpr double kVarianceTolerance = 0.05;
constexpr double kUnbiasedZ = 4.0;

const std::vector<std::pair<ExperimentKind, std::string>>& KindNames() {
  static const std::vector<std::pair<ExperimentKind, std::string>> names = {
      {ExperimentKind::kSumUnbiasedness, "sum-unbiasedness"},
      {ExperimentKind::kSumVariance, "sum-variance"},
      {ExperimentKind::kDivergenceCheck, "divergence-check"},
      {ExperimentKind::kScoSweep, "sco-sweep"},
      {ExperimentKind::kRobustness, "robustness"},
      {ExperimentKind::kPan, "pan"},
  };
  return names;
}

bool IsShuffleSum(ExperimentKind kind) {
  return kind == ExperimentKind::kSumUnbiasedness ||
         kind == ExperimentKind::kSumVariance ||
         kind == ExperimentKind::kDivergenceCheck ||
         kind == ExperimentKind::kRobustness;
}

bool IsNonnegativeInteger(const json& v) {
  return v.is_number_unsigned() ||
         (v.is_number_integer() && v.get<long long>() >= 0);
}

class Reader {
 public:
  Reader(const json& root, std::vector<std::string>& errors)
      : root_(root), errors_(errors) {}

  bool Has(const char* key) const { return root_.contains(key); }

  void Missing(const char* key) {
    errors_.push_back(std::string("missing required key '") + key + "'");
  }

  void Uint(const char* key, std::uint64_t& out, bool required = false) {
    if (!Has(key)) {
      if (required) Missing(key);
      return;
    }
    const json& v = root_.at(key);
    if (!IsNonnegativeInteger(v)) {
      errors_.push_back(std::string("'") + key +
                        "' must be a nonnegative integer");
      return;
    }
    out = v.get<std::uint64_t>();
  }

  void Double(const char* key, double& out, bool required = false) {
    if (!Has(key)) {
      if (required) Missing(key);
      return;
    }
    const json& v = root_.at(key);
    if (!v.is_number()) {
      errors_.push_back(std::string("'") + key + "' must be a number");
      return;
    }
    out = v.get<double>();
  }

  void String(const char* key, std::string& out, bool required = false) {
    if (!Has(key)) {
      if (required) Missing(key);
      return;
    }
    const json& v = root_.at(key);
    if (!v.is_string()) {
      errors_.push_back(std::string("'") + key + "' must be a string");
      return;
    }
    out = v.get<std::string>();
  }

  // Accepts a single value or a non-empty array.
  void UintList(const char* key, std::vector<std::uint64_t>& out,
                bool required = false) {
    List(key, out, required, "nonnegative integers", IsNonnegativeInteger);
  }

  void DoubleList(const char* key, std::vector<double>& out) {
    List(key, out, false, "numbers",
         [](const json& v) { return v.is_number(); });
  }

  void StringList(const char* key, std::vector<std::string>& out) {
    List(key, out, false, "strings",
         [](const json& v) { return v.is_string(); });
  }

 private:
  template <typename T, typename Check>
  void List(const char* key, std::vector<T>& out, bool required,
            const char* what, Check check) {
    if (!Has(key)) {
      if (required) Missing(key);
      return;
    }
    const json& v = root_.at(key);
    std::vector<json> items;
    if (v.is_array()) {
      items.assign(v.begin(), v.end());
    } else {
      items.push_back(v);
    }
    if (items.empty()) {
      errors_.push_back(std::string("'") + key + "' must not be empty");
      return;
    }
    std::vector<T> parsed;
    for (const json& item : items) {
      if (!check(item)) {
        errors_.push_back(std::string("'") + key + "' must hold " + what);
        return;
      }
      parsed.push_back(item.get<T>());
    }
    out = std::move(parsed);
  }

  const json& root_;
  std::vector<std::string>& errors_;
};

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "experiment", "loss",      "n",          "d",      "epsilon",
      "delta",      "norm_cap",  "seeds",      "output", "trials",
      "algorithms", "gaps",      "grains",     "gammas", "batch",
      "eval_size",  "truth_offset", "radius"};
  return keys;
}

std::uint64_t MinimalGrain(std::uint64_t n, double range) {
  return static_cast<std::uint64_t>(
      std::ceil(range * std::sqrt(static_cast<double>(n))));
}

std::vector<std::uint64_t> GrainsFor(const ExperimentConfig& c,
                                     std::uint64_t n) {
  if (!c.grains.empty()) return c.grains;
  return {std::max<std::uint64_t>(MinimalGrain(n, c.norm_cap), 1)};
}

void CheckExactInstances(const ExperimentConfig& c,
                         std::vector<std::string>& errors) {
  const PrivacyBudget budget{c.epsilon, c.delta};
  for (std::uint64_t n : c.n) {
    for (std::uint64_t g : GrainsFor(c, n)) {
      try {
        const ScalarSumParams p =
            SelectScalarSumParamsWithGrain(n, c.norm_cap, g, budget);
        const double support =
            static_cast<double>(p.MessagesPerUser()) * static_cast<double>(n);
        if (support > kExactSupportLimit) {
          errors.push_back("exact support (g + b) n = " +
                           std::to_string(p.MessagesPerUser() * n) +
                           " exceeds 1e5 at n=" + std::to_string(n) +
                           ", g=" + std::to_string(g));
        }
        if (c.kind == ExperimentKind::kRobustness && g < 3) {
          errors.push_back("robustness requires g >= 3, got g=" +
                           std::to_string(g));
        }
      } catch (const std::exception& e) {
        errors.push_back(std::string("parameter selection failed at n=") +
                         std::to_string(n) + ": " + e.what());
      }
    }
  }
}

void CheckSemantics(ConfigResult& r, const std::set<std::string>& present) {
  ExperimentConfig& c = r.config;
  std::vector<std::string>& errors = r.errors;
  for (std::uint64_t n : c.n) {
    if (n < 1) errors.push_back("'n' entries must be >= 1");
  }
  if (c.d < 1) errors.push_back("'d' must be >= 1");
  if (!(c.epsilon > 0.0) || !std::isfinite(c.epsilon)) {
    errors.push_back("'epsilon' must be positive and finite");
  }
  if (!(c.delta > 0.0 && c.delta < 0.5)) {
    errors.push_back("'delta' must lie in (0, 1/2)");
  }
  if (IsShuffleSum(c.kind) && c.epsilon > kMaxShuffleSumEpsilon) {
    errors.push_back("'epsilon' must be <= 15 for shuffle-sum experiments");
  }
  if (!(c.norm_cap > 0.0) || !std::isfinite(c.norm_cap)) {
    errors.push_back("'norm_cap' must be positive and finite");
  }
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) {
    errors.push_back("'radius' must be positive and finite");
  }
  if (c.seeds < 1) errors.push_back("'seeds' must be >= 1");
  if (present.count("output") && c.output.empty()) {
    errors.push_back("'output' must not be empty");
  }
  if (c.trials < 2) errors.push_back("'trials' must be >= 2");
  if (c.eval_size < 1) errors.push_back("'eval_size' must be >= 1");
  for (std::uint64_t g : c.grains) {
    if (g < 1) errors.push_back("'grains' entries must be >= 1");
  }

  switch (c.kind) {
    case ExperimentKind::kSumVariance:
      if (c.d != 1) errors.push_back("sum-variance requires d = 1");
      break;
    case ExperimentKind::kDivergenceCheck:
    case ExperimentKind::kRobustness: {
      if (c.d != 1) errors.push_back(ToString(c.kind) + " requires d = 1");
      for (std::uint64_t n : c.n) {
        if (n > 4) {
          errors.push_back(ToString(c.kind) +
                           " enumerates exactly and requires n <= 4");
          break;
        }
      }
      for (double gap : c.gaps) {
        if (!(gap > 0.0 && gap <= c.norm_cap)) {
          errors.push_back("'gaps' entries must lie in (0, norm_cap]");
          break;
        }
      }
      if (c.kind == ExperimentKind::kRobustness) {
        if (c.epsilon > 1.0) {
          errors.push_back("'epsilon' must be <= 1 for robustness");
        }
        for (double gamma : c.gammas) {
          if (!(gamma >= 1.0 / 3.0 && gamma <= 1.0)) {
            errors.push_back("'gammas' entries must lie in [1/3, 1]");
            break;
          }
        }
      }
      bool ranges_ok = c.epsilon > 0.0 && c.delta > 0.0 && c.delta < 0.5 &&
                       c.epsilon <= kMaxShuffleSumEpsilon && c.norm_cap > 0.0;
      for (std::uint64_t n : c.n) ranges_ok = ranges_ok && n >= 1 && n <= 4;
      for (std::uint64_t g : c.grains) ranges_ok = ranges_ok && g >= 1;
      if (ranges_ok) CheckExactInstances(c, errors);
      break;
    }
    case ExperimentKind::kScoSweep: {
      for (std::uint64_t n : c.n) {
        if (n < 2) {
          errors.push_back("sco-sweep requires n >= 2");
          break;
        }
      }
      const bool smooth = c.loss == LossKind::kQuadratic ||
                          c.loss == LossKind::kLogistic;
      const bool strongly_convex = c.loss == LossKind::kQuadratic;
      for (const std::string& a : c.algorithms) {
        const auto& known = KnownAlgorithms();
        if (std::find(known.begin(), known.end(), a) == known.end()) {
          errors.push_back("unknown algorithm '" + a + "'");
        } else if (a == "acsa" && !smooth) {
          errors.push_back("acsa requires a smooth loss");
        } else if ((a == "strongly-convex" || a == "fip-strongly-convex") &&
                   !strongly_convex) {
          errors.push_back(a + " requires a strongly convex loss");
        }
      }
      break;
    }
    case ExperimentKind::kPan:
      if (!(c.epsilon < 1.0)) {
        errors.push_back("'epsilon' must be < 1 for pan");
      }
      if (c.loss != LossKind::kQuadratic && c.loss != LossKind::kLogistic) {
        errors.push_back("pan requires a smooth loss");
      }
      if (c.batch < 1) errors.push_back("'batch' must be >= 1");
      for (std::uint64_t n : c.n) {
        if (n < c.batch) {
          errors.push_back("pan requires n >= batch");
          break;
        }
      }
      break;
    case ExperimentKind::kSumUnbiasedness:
      break;
  }
  if (c.truth_offset >= 0.0 && c.truth_offset > c.radius) {
    errors.push_back("'truth_offset' must not exceed 'radius'");
  }
}

struct TaskOutput {
  std::vector<std::string> cells;
  bool pass = true;
  std::string failure;
  double metric = 0.0;
};

struct Setting {
  std::vector<std::pair<std::string, json>> keys;  // identifies the setting
  std::function<TaskOutput(std::uint64_t seed)> run;
};

std::string Bool(bool b) { return b ? "1" : "0"; }
std::string U(std::uint64_t v) { return std::to_string(v); }

double Median(std::vector<double> v) {
  if (v.empty()) return std::nan("");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

struct Welford {
  std::uint64_t count = 0;
  long double mean = 0.0L;
  long double m2 = 0.0L;
  void Add(long double x) {
    ++count;
    const long double d = x - mean;
    mean += d / static_cast<long double>(count);
    m2 += d * (x - mean);
  }
  double Variance() const {
    return static_cast<double>(m2 / static_cast<long double>(count - 1));
  }
};

std::vector<double> ScalarInstance(std::uint64_t n, double range,
                                   std::uint64_t seed) {
  SeededRng rng(seed, kDataStream);
  std::vector<double> xs(n);
  for (double& x : xs) x = range * rng.Uniform();
  return xs;
}

TaskOutput Unbiasedness(const ExperimentConfig& c, std::uint64_t n,
                        std::uint64_t seed) {
  const PrivacyBudget budget{c.epsilon, c.delta};
  SeededRng trials_rng(seed, kTrialStream);
  Vec truth;
  Vec variances;
  std::vector<Welford> acc(c.d);
  if (c.d == 1) {
    const std::vector<double> xs = ScalarInstance(n, c.norm_cap, seed);
    const ScalarSumParams params = SelectScalarSumParams(n, c.norm_cap, budget);
    truth = Vec::Constant(1, std::accumulate(xs.begin(), xs.end(), 0.0));
    variances = Vec::Constant(1, AnalyticVariance(xs, params));
    for (std::uint64_t t = 0; t < c.trials; ++t) {
      const ShuffledView view =
          RunScalarSum(xs, params, trials_rng, NoiseMode::kPooled);
      acc[0].Add(AnalyzeScalar(view, params));
    }
  } else {
    SeededRng data_rng(seed, kDataStream);
    std::vector<Vec> xs(n);
    truth = Vec::Zero(static_cast<Eigen::Index>(c.d));
    for (Vec& x : xs) {
      x = UniformInBall(c.d, c.norm_cap, data_rng);
      truth += x;
    }
    const VectorSumParams params =
        SelectVectorSumParams(n, c.d, c.norm_cap, budget);
    variances = CoordinateVariances(xs, params);
    for (std::uint64_t t = 0; t < c.trials; ++t) {
      const Vec out = AnalyzeVector(
          RunVectorSum(xs, params, trials_rng, NoiseMode::kPooled), params);
      for (std::uint64_t j = 0; j < c.d; ++j) {
        acc[j].Add(out[static_cast<Eigen::Index>(j)]);
      }
    }
  }
  double max_err = 0.0;
  double max_z = 0.0;
  double max_std = 0.0;
  const double root = std::sqrt(static_cast<double>(c.trials));
  for (std::uint64_t j = 0; j < c.d; ++j) {
    const auto i = static_cast<Eigen::Index>(j);
    const double err = std::abs(static_cast<double>(acc[j].mean) - truth[i]);
    const double sd = std::sqrt(variances[i]);
    max_err = std::max(max_err, err);
    max_std = std::max(max_std, sd);
    max_z = std::max(max_z, err / (sd / root));
  }
  TaskOutput out;
  out.pass = max_z <= kUnbiasedZ;
  out.metric = max_z;
  out.cells = {U(n), U(c.d), U(seed), U(c.trials), FormatDouble(max_err),
               FormatDouble(max_std), FormatDouble(max_z), Bool(out.pass)};
  if (!out.pass) {
    out.failure = "n=" + U(n) + " seed=" + U(seed) + ": mean off by " +
                  FormatDouble(max_z) + " standard errors";
  }
  return out;
}

TaskOutput Variance(const ExperimentConfig& c, std::uint64_t n,
                    std::uint64_t seed) {
  const PrivacyBudget budget{c.epsilon, c.delta};
  const std::vector<double> xs = ScalarInstance(n, c.norm_cap, seed);
  const ScalarSumParams params = SelectScalarSumParams(n, c.norm_cap, budget);
  SeededRng rng(seed, kTrialStream);
  Welford acc;
  for (std::uint64_t t = 0; t < c.trials; ++t) {
    acc.Add(AnalyzeScalar(RunScalarSum(xs, params, rng, NoiseMode::kPooled),
                          params));
  }
  const double mc = acc.Variance();
  const double analytic = AnalyticVariance(xs, params);
  const double bound = VarianceBound(params);
  const double ratio = mc / analytic;
  TaskOutput out;
  const bool close = std::abs(ratio - 1.0) <= kVarianceTolerance;
  const bool bounded = analytic <= bound;
  out.pass = close && bounded;
  out.metric = ratio;
  out.cells = {U(n),           U(seed),           U(c.trials),
               FormatDouble(mc), FormatDouble(analytic), FormatDouble(ratio),
               FormatDouble(bound), Bool(out.pass)};
  if (!close) {
    out.failure = "n=" + U(n) + " seed=" + U(seed) +
                  ": Monte-Carlo/analytic variance ratio " +
                  FormatDouble(ratio);
  } else if (!bounded) {
    out.failure = "n=" + U(n) + " seed=" + U(seed) +
                  ": analytic variance exceeds the frozen bound";
  }
  return out;
}

struct Neighbors {
  std::vector<double> x;
  std::vector<double> x_prime;
};

// Random dataset in [0, Delta]^n and a neighbor whose first user moves by gap.
Neighbors MakeNeighbors(std::uint64_t n, double range, double gap,
                        std::uint64_t seed) {
  Neighbors out;
  out.x = ScalarInstance(n, range, seed);
  SeededRng rng(seed, kDataStream + 100);
  out.x[0] = (range - gap) * rng.Uniform();
  out.x_prime = out.x;
  out.x_prime[0] = std::min(out.x[0] + gap, range);
  return out;
}

double SymmetricDivergence(const std::vector<double>& x,
                           const std::vector<double>& x_prime,
                           const ScalarSumParams& params) {
  const FiniteDistribution p = ExactOutputDistribution(x, params);
  const FiniteDistribution q = ExactOutputDistribution(x_prime, params);
  return std::max(ApproxMaxDivergence(p, q, params.delta),
                  ApproxMaxDivergence(q, p, params.delta));
}

TaskOutput Divergence(const ExperimentConfig& c, std::uint64_t n,
                      std::uint64_t g, double gap, std::uint64_t seed) {
  const ScalarSumParams params = SelectScalarSumParamsWithGrain(
      n, c.norm_cap, g, {c.epsilon, c.delta});
  const Neighbors nb = MakeNeighbors(n, c.norm_cap, gap, seed);
  const double gap_used = nb.x_prime[0] - nb.x[0];
  const double enumerated = SymmetricDivergence(nb.x, nb.x_prime, params);
  const double bound = ScalarSumDivergenceBound(params, gap_used);
  TaskOutput out;
  out.pass = enumerated <= bound;
  out.metric = enumerated;
  out.cells = {U(n),
               U(seed),
               U(params.grain),
               U(params.trials),
               FormatDouble(params.p),
               FormatDouble(gap_used),
               FormatDouble(enumerated),
               FormatDouble(bound),
               Bool(out.pass)};
  if (!out.pass) {
    out.failure = "n=" + U(n) + " g=" + U(g) + " seed=" + U(seed) +
                  ": enumerated divergence " + FormatDouble(enumerated) +
                  " exceeds bound " + FormatDouble(bound);
  }
  return out;
}

TaskOutput Robustness(const ExperimentConfig& c, std::uint64_t n,
                      std::uint64_t g, double gamma, double gap,
                      std::uint64_t seed) {
  const ScalarSumParams params = SelectScalarSumParamsWithGrain(
      n, c.norm_cap, g, {c.epsilon, c.delta});
  const Neighbors nb = MakeNeighbors(n, c.norm_cap, gap, seed);
  const HonestSubset honest = HonestSubset::Prefix(n, gamma);
  std::vector<double> kept;
  std::vector<double> kept_prime;
  for (std::uint64_t i : honest.honest) {
    kept.push_back(nb.x[i]);
    kept_prime.push_back(nb.x_prime[i]);
  }
  const double gap_used = nb.x_prime[0] - nb.x[0];
  const double enumerated = SymmetricDivergence(kept, kept_prime, params);
  const double bound = RobustScalarSumBound(params, gamma, gap_used);
  std::string identical = "na";
  bool identical_ok = true;
  if (gamma == 1.0) {
    SeededRng a(seed, kTrialStream);
    SeededRng b(seed, kTrialStream);
    const RobustScalarResult robust =
        RunScalarWithDropouts(nb.x, params, honest, a);
    const ShuffledView plain = RunScalarSum(nb.x, params, b);
    identical_ok = robust.view.ones_count == plain.ones_count &&
                   robust.estimate == AnalyzeScalar(plain, params);
    identical = Bool(identical_ok);
  }
  TaskOutput out;
  out.pass = enumerated <= bound && identical_ok;
  out.metric = enumerated;
  out.cells = {U(n),
               U(seed),
               FormatDouble(gamma),
               U(honest.honest.size()),
               U(params.grain),
               U(params.trials),
               FormatDouble(params.p),
               FormatDouble(gap_used),
               FormatDouble(enumerated),
               FormatDouble(bound),
               identical,
               Bool(out.pass)};
  if (!out.pass) {
    out.failure = "n=" + U(n) + " gamma=" + FormatDouble(gamma) +
                  " seed=" + U(seed) +
                  (identical_ok ? ": enumerated divergence exceeds bound"
                                : ": gamma=1 path differs from standard path");
  }
  return out;
}

struct ScoContext {
  Ball space;
  SynthOptions synth;
  std::unique_ptr<LossModel> loss;
  std::unique_ptr<PopulationObjective> objective;
};

std::unique_ptr<ScoContext> MakeScoContext(const ExperimentConfig& c) {
  auto ctx = std::make_unique<ScoContext>(ScoContext{
      Ball::Centered(static_cast<Eigen::Index>(c.d), c.radius), {}, {}, {}});
  if (c.truth_offset >= 0.0) {
    ctx->synth.truth = Vec::Constant(static_cast<Eigen::Index>(c.d),
                                     c.truth_offset /
                                         std::sqrt(static_cast<double>(c.d)));
  }
  ctx->loss = MakeLoss(c.loss, ctx->space, ctx->synth);
  SeededRng eval_rng(kEvalSeed, 0);
  ctx->objective = std::make_unique<PopulationObjective>(
      PopulationObjective::Build(c.loss, *ctx->loss, ctx->space, c.d,
                                 ctx->synth, eval_rng, c.eval_size));
  return ctx;
}

TaskOutput Sco(const ExperimentConfig& c, const ScoContext& ctx,
               const std::string& algorithm, std::uint64_t n,
               std::uint64_t seed) {
  SeededRng data_rng(seed, kDataStream);
  const Dataset data = SynthData(c.loss, n, c.d, data_rng, ctx.synth).data;
  const PrivacyBudget budget{c.epsilon, c.delta};
  RunOptions opts;
  opts.seed = seed;
  opts.stream = kRunStream;
  RunReport r;
  const LossModel& loss = *ctx.loss;
  if (algorithm == "sgd") {
    r = RunSgd(loss, data, budget, ctx.space, opts);
  } else if (algorithm == "acsa") {
    r = RunAcsa(loss, data, budget, ctx.space, opts);
  } else if (algorithm == "smoothed-acsa") {
    r = RunSmoothedAcsa(loss, data, budget, ctx.space, opts);
  } else if (algorithm == "strongly-convex") {
    r = RunStronglyConvex(loss, data, budget, ctx.space,
                          loss.smoothness().has_value(), opts);
  } else if (algorithm == "fip") {
    r = RunFipGd(loss, data, budget, ctx.space, false, opts);
  } else {
    r = RunFipGd(loss, data, budget, ctx.space, true, opts);
  }
  const double excess = ctx.objective->Excess(r.theta);
  TaskOutput out;
  out.pass = r.certificate.within_claim;
  out.metric = excess;
  out.cells = {algorithm,
               U(n),
               U(seed),
               U(r.rounds),
               U(r.batch_sizes.empty() ? 0 : r.batch_sizes.front()),
               FormatDouble(r.step_size),
               r.envelope_beta ? FormatDouble(*r.envelope_beta) : "na",
               FormatDouble(excess),
               FormatDouble(r.empirical_loss),
               FormatDouble(r.certificate.claimed.epsilon),
               FormatDouble(r.certificate.composed.epsilon),
               FormatDouble(r.certificate.composed.delta),
               Bool(out.pass)};
  if (!out.pass) {
    out.failure = algorithm + " n=" + U(n) + " seed=" + U(seed) +
                  ": certificate exceeds the claimed budget";
  }
  return out;
}

TaskOutput Pan(const ExperimentConfig& c, const ScoContext& ctx,
               std::uint64_t n, std::uint64_t seed) {
  SeededRng data_rng(seed, kDataStream);
  const Dataset data = SynthData(c.loss, n, c.d, data_rng, ctx.synth).data;
  const PrivacyBudget budget{c.epsilon, c.delta};
  PanOptions opts;
  opts.seed = seed;
  opts.stream = kRunStream;
  const RunReport r =
      RunPanAcsa(*ctx.loss, data, budget, ctx.space, c.batch, opts);
  const double zeta2 = PanNoiseVariance(ctx.loss->lipschitz(), c.batch, budget);
  const double excess = ctx.objective->Excess(r.theta);
  TaskOutput out;
  out.pass = std::isfinite(excess) && ctx.space.Contains(r.theta);
  out.metric = excess;
  out.cells = {U(n),
               U(seed),
               U(c.batch),
               U(r.rounds),
               FormatDouble(zeta2),
               FormatDouble(excess),
               FormatDouble(r.empirical_loss),
               Bool(out.pass)};
  if (!out.pass) {
    out.failure = "pan n=" + U(n) + " seed=" + U(seed) +
                  ": output outside the parameter ball";
  }
  return out;
}

json ConfigToJson(const ExperimentConfig& c) {
  json j;
  j["experiment"] = ToString(c.kind);
  j["loss"] = ToString(c.loss);
  j["n"] = c.n;
  j["d"] = c.d;
  j["epsilon"] = c.epsilon;
  j["delta"] = c.delta;
  j["norm_cap"] = c.norm_cap;
  j["seeds"] = c.seeds;
  j["output"] = c.output;
  j["trials"] = c.trials;
  j["algorithms"] = c.algorithms;
  j["gaps"] = c.gaps;
  j["grains"] = c.grains;
  j["gammas"] = c.gammas;
  j["batch"] = c.batch;
  j["eval_size"] = c.eval_size;
  j["truth_offset"] = c.truth_offset;
  j["radius"] = c.radius;
  return j;
}

std::vector<Setting> BuildSettings(const ExperimentConfig& c,
                                   std::vector<std::string>& columns,
                                   const ScoContext* ctx) {
  std::vector<Setting> out;
  switch (c.kind) {
    case ExperimentKind::kSumUnbiasedness:
      columns = {"n",    "d",           "seed",  "trials", "max_abs_error",
                 "max_analytic_std", "max_z", "pass"};
      for (std::uint64_t n : c.n) {
        out.push_back({{{"n", n}},
                       [&c, n](std::uint64_t s) { return Unbiasedness(c, n, s); }});
      }
      break;
    case ExperimentKind::kSumVariance:
      columns = {"n",     "seed",           "trials",
                 "mc_variance", "analytic_variance", "ratio",
                 "frozen_bound", "pass"};
      for (std::uint64_t n : c.n) {
        out.push_back({{{"n", n}},
                       [&c, n](std::uint64_t s) { return Variance(c, n, s); }});
      }
      break;
    case ExperimentKind::kDivergenceCheck:
      columns = {"n",   "seed", "g",
                 "b",   "p",    "gap",
                 "enumerated_divergence", "bound", "pass"};
      for (std::uint64_t n : c.n) {
        for (std::uint64_t g : GrainsFor(c, n)) {
          for (double gap : c.gaps) {
            out.push_back({{{"n", n}, {"g", g}, {"gap", gap}},
                           [&c, n, g, gap](std::uint64_t s) {
                             return Divergence(c, n, g, gap, s);
                           }});
          }
        }
      }
      break;
    case ExperimentKind::kRobustness:
      columns = {"n",   "seed", "gamma", "honest", "g",
                 "b",   "p",    "gap",   "enumerated_divergence",
                 "bound", "identical_to_standard", "pass"};
      for (std::uint64_t n : c.n) {
        for (std::uint64_t g : GrainsFor(c, n)) {
          for (double gamma : c.gammas) {
            for (double gap : c.gaps) {
              out.push_back(
                  {{{"n", n}, {"g", g}, {"gamma", gamma}, {"gap", gap}},
                   [&c, n, g, gamma, gap](std::uint64_t s) {
                     return Robustness(c, n, g, gamma, gap, s);
                   }});
            }
          }
        }
      }
      break;
    case ExperimentKind::kScoSweep:
      columns = {"algorithm",       "n",
                 "seed",            "rounds",
                 "batch",           "step",
                 "envelope_beta",   "excess_loss",
                 "empirical_loss",  "claimed_epsilon",
                 "composed_epsilon", "composed_delta",
                 "pass"};
      for (const std::string& a : c.algorithms) {
        for (std::uint64_t n : c.n) {
          out.push_back({{{"algorithm", a}, {"n", n}},
                         [&c, ctx, a, n](std::uint64_t s) {
                           return Sco(c, *ctx, a, n, s);
                         }});
        }
      }
      break;
    case ExperimentKind::kPan:
      columns = {"n",     "seed",        "batch",          "rounds",
                 "zeta2", "excess_loss", "empirical_loss", "pass"};
      for (std::uint64_t n : c.n) {
        out.push_back({{{"n", n}}, [&c, ctx, n](std::uint64_t s) {
                         return Pan(c, *ctx, n, s);
                       }});
      }
      break;
  }
  return out;
}

const char* MetricName(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSumUnbiasedness:
      return "median_max_z";
    case ExperimentKind::kSumVariance:
      return "median_variance_ratio";
    case ExperimentKind::kDivergenceCheck:
    case ExperimentKind::kRobustness:
      return "median_enumerated_divergence";
    case ExperimentKind::kScoSweep:
    case ExperimentKind::kPan:
      return "median_excess_loss";
  }
  return "median";
}

}  // namespace

ExperimentKind ParseExperimentKind(std::string_view name) {
  for (const auto& [kind, text] : KindNames()) {
    if (text == name) return kind;
  }
  throw std::invalid_argument("unknown experiment kind '" + std::string(name) +
                              "'");
}

std::string ToString(ExperimentKind kind) {
  for (const auto& [k, text] : KindNames()) {
    if (k == kind) return text;
  }
  return "unknown";
}

ConfigResult ParseConfig(std::string_view json_text) {
  ConfigResult r;
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    r.errors.push_back(std::string("parse error: ") + e.what());
    return r;
  }
  if (!root.is_object()) {
    r.errors.push_back("config must be a JSON object");
    return r;
  }
  std::set<std::string> present;
  for (const auto& item : root.items()) {
    present.insert(item.key());
    if (!KnownKeys().count(item.key())) {
      r.errors.push_back("unknown key '" + item.key() + "'");
    }
  }
  ExperimentConfig& c = r.config;
  Reader read(root, r.errors);

  std::string kind;
  read.String("experiment", kind, true);
  bool kind_ok = false;
  if (present.count("experiment") && root["experiment"].is_string()) {
    try {
      c.kind = ParseExperimentKind(kind);
      kind_ok = true;
    } catch (const std::invalid_argument& e) {
      r.errors.push_back(e.what());
    }
  }
  std::string loss;
  read.String("loss", loss);
  if (present.count("loss") && root["loss"].is_string()) {
    try {
      c.loss = ParseLossKind(loss);
    } catch (const std::invalid_argument& e) {
      r.errors.push_back(e.what());
    }
  }
  read.UintList("n", c.n, true);
  read.Uint("d", c.d);
  read.Double("epsilon", c.epsilon, true);
  read.Double("delta", c.delta, true);
  read.Double("norm_cap", c.norm_cap);
  read.Uint("seeds", c.seeds, true);
  read.String("output", c.output, true);
  read.Uint("trials", c.trials);
  read.StringList("algorithms", c.algorithms);
  read.DoubleList("gaps", c.gaps);
  read.UintList("grains", c.grains);
  read.DoubleList("gammas", c.gammas);
  read.Uint("batch", c.batch);
  read.Uint("eval_size", c.eval_size);
  read.Double("truth_offset", c.truth_offset);
  read.Double("radius", c.radius);
  if (kind_ok) CheckSemantics(r, present);
  return r;
}

ConfigResult ValidateConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigResult r;
    r.errors.push_back("cannot read config file '" + path.string() + "'");
    return r;
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseConfig(text.str());
}

std::string FormatDouble(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const ExperimentOptions& options) {
  std::unique_ptr<ScoContext> ctx;
  if (config.kind == ExperimentKind::kScoSweep ||
      config.kind == ExperimentKind::kPan) {
    ctx = MakeScoContext(config);
  }
  ExperimentResult result;
  std::vector<Setting> settings =
      BuildSettings(config, result.columns, ctx.get());

  const std::size_t tasks = settings.size() * config.seeds;
  std::vector<TaskOutput> outputs(tasks);
  std::vector<std::exception_ptr> errors(tasks);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks; i = next++) {
      const Setting& s = settings[i / config.seeds];
      const std::uint64_t seed = options.seed_base + i % config.seeds;
      try {
        outputs[i] = s.run(seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned workers = std::max(1u, options.workers);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  json summary;
  summary["experiment"] = ToString(config.kind);
  summary["config"] = ConfigToJson(config);
  summary["seed_base"] = options.seed_base;
  json setting_list = json::array();
  std::map<std::string, std::vector<double>> medians_by_algorithm;
  for (std::size_t si = 0; si < settings.size(); ++si) {
    json entry;
    for (const auto& [k, v] : settings[si].keys) entry[k] = v;
    std::vector<double> metrics;
    std::uint64_t passed = 0;
    for (std::uint64_t s = 0; s < config.seeds; ++s) {
      TaskOutput& out = outputs[si * config.seeds + s];
      metrics.push_back(out.metric);
      if (out.pass) {
        ++passed;
      } else {
        result.all_pass = false;
        result.failures.push_back(out.failure);
      }
      result.rows.push_back(std::move(out.cells));
    }
    const double median = Median(metrics);
    entry[MetricName(config.kind)] = median;
    entry["rows_passed"] = passed;
    entry["rows"] = config.seeds;
    if (config.kind == ExperimentKind::kScoSweep) {
      medians_by_algorithm[entry["algorithm"].get<std::string>()].push_back(
          median);
    }
    setting_list.push_back(entry);
  }
  summary["settings"] = setting_list;

  json reference;
  const PrivacyBudget budget{config.epsilon, config.delta};
  switch (config.kind) {
    case ExperimentKind::kSumUnbiasedness:
      reference["z_threshold"] = kUnbiasedZ;
      break;
    case ExperimentKind::kSumVariance:
      reference["variance_tolerance"] = kVarianceTolerance;
      reference["variance_bound_constant"] = kVarianceBoundConstant;
      break;
    case ExperimentKind::kDivergenceCheck:
    case ExperimentKind::kRobustness:
      reference["bound"] = config.kind == ExperimentKind::kRobustness
                               ? "(eps/gamma)(2/g + gap/Delta)"
                               : "eps(2/g + gap/Delta)";
      break;
    case ExperimentKind::kScoSweep: {
      reference["population_min_value"] = ctx->objective->MinValue();
      bool all_monotone = true;
      json monotone;
      for (const auto& [alg, medians] : medians_by_algorithm) {
        bool dec = true;
        for (std::size_t i = 1; i < medians.size(); ++i) {
          dec = dec && medians[i] < medians[i - 1];
        }
        monotone[alg] = dec;
        if (!dec) {
          result.failures.push_back(alg +
                                    ": median excess loss not strictly "
                                    "decreasing in n");
        }
        all_monotone = all_monotone && dec;
      }
      summary["monotone_decreasing_by_algorithm"] = monotone;
      summary["monotone_decreasing"] = all_monotone;
      result.all_pass = result.all_pass && all_monotone;
      if (medians_by_algorithm.count("fip") &&
          medians_by_algorithm.count("sgd")) {
        const auto& fip = medians_by_algorithm["fip"];
        const auto& sgd = medians_by_algorithm["sgd"];
        bool le = true;
        for (std::size_t i = 0; i < fip.size(); ++i) le = le && fip[i] <= sgd[i];
        summary["fip_le_sgd"] = le;
        if (!le) result.failures.push_back("fip median exceeds sgd median");
        result.all_pass = result.all_pass && le;
      }
      break;
    }
    case ExperimentKind::kPan:
      reference["zeta2"] =
          PanNoiseVariance(ctx->loss->lipschitz(), config.batch, budget);
      reference["population_min_value"] = ctx->objective->MinValue();
      break;
  }
  summary["reference"] = reference;
  summary["all_pass"] = result.all_pass;
  result.summary_json = summary.dump(2) + "\n";
  return result;
}

std::string ToCsv(const ExperimentResult& result) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(result.columns);
  for (const auto& row : result.rows) line(row);
  return out;
}

void WriteResult(const ExperimentResult& result, const ExperimentConfig& config,
                 const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path stem = dir / config.output;
  if (stem.has_parent_path()) {
    std::filesystem::create_directories(stem.parent_path(), ec);
  }
  auto write = [](const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write output file '" + path.string() +
                               "'");
    }
    out << text;
    out.close();
    if (!out) {
      throw std::runtime_error("failed writing '" + path.string() + "'");
    }
  };
  write(std::filesystem::path(stem.string() + ".csv"), ToCsv(result));
  write(std::filesystem::path(stem.string() + ".json"), result.summary_json);
}

}  // namespace shuffle_sco
