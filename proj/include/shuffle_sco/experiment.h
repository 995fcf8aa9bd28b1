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

#ifndef SHUFFLE_SCO_EXPERIMENT_H_
#define SHUFFLE_SCO_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "shuffle_sco/synth.h"

namespace shuffle_sco {

enum class ExperimentKind {
  kSumUnbiasedness,
  kSumVariance,
  kDivergenceCheck,
  kScoSweep,
  kRobustness,
  kPan,
};

ExperimentKind ParseExperimentKind(std::string_view name);
std::string ToString(ExperimentKind kind);

// Optimizers a sco-sweep can run.
inline const std::vector<std::string>& KnownAlgorithms() {
  static const std::vector<std::string> names = {
      "sgd", "acsa", "smoothed-acsa", "strongly-convex", "fip",
      "fip-strongly-convex"};
  return names;
}

// JSON config. Required keys: experiment, n, epsilon, delta, seeds, output.
// Everything else has a default.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::kSumUnbiasedness;
  LossKind loss = LossKind::kQuadratic;
  std::vector<std::uint64_t> n;
  std::uint64_t d = 1;
  double epsilon = 1.0;
  double delta = 1e-5;
  double norm_cap = 1.0;  // Delta for scalar sums, Delta_2 for vector sums
  std::uint64_t seeds = 1;
  std::string output;  // file stem of the CSV and JSON summary

  std::uint64_t trials = 10000;
  std::vector<std::string> algorithms = {"sgd"};
  std::vector<double> gaps = {0.5};
  std::vector<std::uint64_t> grains;  // empty: minimal grain
  std::vector<double> gammas = {1.0};
  std::uint64_t batch = 10;
  std::uint64_t eval_size = 100000;
  double truth_offset = -1.0;  // negative: loss-specific default truth
  double radius = 1.0;         // parameter ball radius
};

struct ConfigResult {
  ExperimentConfig config;
  std::vector<std::string> errors;  // every problem found, never just the first
  bool ok() const { return errors.empty(); }
};

ConfigResult ParseConfig(std::string_view json_text);
ConfigResult ValidateConfigFile(const std::filesystem::path& path);

struct ExperimentOptions {
  std::uint64_t seed_base = 0;
  unsigned workers = 1;
};

// One CSV row per (setting, seed), ordered by setting then seed.
struct ExperimentResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string summary_json;
  bool all_pass = true;
  std::vector<std::string> failures;
};

ExperimentResult RunExperiment(const ExperimentConfig& config,
                               const ExperimentOptions& options = {});

// %.17g, the format used for every float in CSV output.
std::string FormatDouble(double value);

std::string ToCsv(const ExperimentResult& result);

// Writes <dir>/<output>.csv and <dir>/<output>.json. Throws on I/O failure.
void WriteResult(const ExperimentResult& result, const ExperimentConfig& config,
                 const std::filesystem::path& dir);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_EXPERIMENT_H_
