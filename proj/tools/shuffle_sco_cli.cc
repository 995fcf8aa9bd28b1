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

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "CLI11.hpp"
#include "shuffle_sco/experiment.h"

namespace {

using shuffle_sco::ConfigResult;

bool ReportErrors(const ConfigResult& parsed, const std::string& path) {
  if (parsed.ok()) return false;
  std::fprintf(stderr, "%s: %zu error(s)\n", path.c_str(),
               parsed.errors.size());
  for (const std::string& e : parsed.errors) {
    std::fprintf(stderr, "  - %s\n", e.c_str());
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shuffle-private summation and convex optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed_base = 0;
  unsigned workers = 1;
  bool check = false;
  std::string out_dir = ".";

  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--seed-base", seed_base, "First seed of the sweep");
  run->add_option("--workers", workers, "Worker threads")
      ->check(CLI::PositiveNumber);
  run->add_flag("--check", check,
                "Exit nonzero when any acceptance property fails");
  run->add_option("--out", out_dir, "Output directory");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a config and list every problem");
  validate->add_option("config", config_path, "JSON config file")->required();

  CLI11_PARSE(app, argc, argv);

  const ConfigResult parsed = shuffle_sco::ValidateConfigFile(config_path);
  if (ReportErrors(parsed, config_path)) return 2;
  if (validate->parsed()) {
    std::printf("%s: ok (%s)\n", config_path.c_str(),
                shuffle_sco::ToString(parsed.config.kind).c_str());
    return 0;
  }

  try {
    const shuffle_sco::ExperimentResult result = shuffle_sco::RunExperiment(
        parsed.config, {.seed_base = seed_base, .workers = workers});
    shuffle_sco::WriteResult(result, parsed.config, out_dir);
    const std::filesystem::path stem =
        std::filesystem::path(out_dir) / parsed.config.output;
    std::printf("wrote %s.csv (%zu rows) and %s.json\n", stem.c_str(),
                result.rows.size(), stem.c_str());
    if (!result.all_pass) {
      for (const std::string& f : result.failures) {
        std::fprintf(stderr, "FAIL: %s\n", f.c_str());
      }
      if (check) return 1;
    } else if (check) {
      std::printf("all checks passed\n");
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
