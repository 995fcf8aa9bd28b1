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

#include "shuffle_sco/transcript.h"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace shuffle_sco {

using nlohmann::json;

bool Transcript::SequentiallyDisjoint() const {
  std::vector<UserRange> ranges;
  ranges.reserve(rounds.size());
  for (const RoundRecord& r : rounds) {
    if (r.users.size() > 0) ranges.push_back(r.users);
  }
  std::sort(ranges.begin(), ranges.end(),
            [](const UserRange& a, const UserRange& b) {
              return a.begin < b.begin;
            });
  for (std::size_t i = 1; i < ranges.size(); ++i) {
    if (ranges[i].begin < ranges[i - 1].end) return false;
  }
  return true;
}

std::vector<UserRange> AllocateUsers(
    std::uint64_t n, Interactivity mode,
    std::span<const std::uint64_t> round_sizes) {
  std::vector<UserRange> out;
  out.reserve(round_sizes.size());
  if (mode == Interactivity::kFull) {
    for (std::size_t i = 0; i < round_sizes.size(); ++i) out.push_back({0, n});
    return out;
  }
  std::uint64_t next = 0;
  for (std::uint64_t size : round_sizes) {
    if (size > n - next) {
      throw std::invalid_argument(
          "allocate users: round sizes exceed the number of users");
    }
    out.push_back({next, next + size});
    next += size;
  }
  return out;
}

namespace {

json ParamsToJson(const ScalarSumParams& p) {
  return json{{"range", p.range},     {"grain", p.grain},
              {"trials", p.trials},   {"p", p.p},
              {"users", p.users},     {"epsilon", p.epsilon},
              {"delta", p.delta}};
}

ScalarSumParams ParamsFromJson(const json& j) {
  ScalarSumParams p;
  p.range = j.at("range").get<double>();
  p.grain = j.at("grain").get<std::uint64_t>();
  p.trials = j.at("trials").get<std::uint64_t>();
  p.p = j.at("p").get<double>();
  p.users = j.at("users").get<std::uint64_t>();
  p.epsilon = j.at("epsilon").get<double>();
  p.delta = j.at("delta").get<double>();
  return p;
}

}  // namespace

std::string TranscriptToJson(const Transcript& transcript) {
  json rounds = json::array();
  for (const RoundRecord& r : transcript.rounds) {
    rounds.push_back(json{
        {"round", r.round},
        {"users", {r.users.begin, r.users.end}},
        {"size", r.users.size()},
        {"randomizer", r.randomizer},
        {"noise_mode",
         r.noise_mode == NoiseMode::kPerUser ? "per_user" : "pooled"},
        {"params", ParamsToJson(r.params)},
        {"dim", r.dim},
        {"l2_cap", r.l2_cap},
        {"ones_counts", r.ones_counts},
        {"seed", r.seed},
        {"stream", r.stream},
        {"query_point",
         std::vector<double>(r.query_point.data(),
                             r.query_point.data() + r.query_point.size())},
    });
  }
  json out{{"mode", transcript.mode == Interactivity::kFull ? "full"
                                                             : "sequential"},
           {"rounds", rounds}};
  return out.dump(2);
}

Transcript TranscriptFromJson(std::string_view text) {
  const json j = json::parse(text);
  Transcript t;
  const std::string mode = j.at("mode").get<std::string>();
  if (mode == "full") {
    t.mode = Interactivity::kFull;
  } else if (mode == "sequential") {
    t.mode = Interactivity::kSequential;
  } else {
    throw std::invalid_argument("transcript: unknown mode " + mode);
  }
  for (const json& r : j.at("rounds")) {
    RoundRecord rec;
    rec.round = r.at("round").get<std::uint64_t>();
    rec.users.begin = r.at("users").at(0).get<std::uint64_t>();
    rec.users.end = r.at("users").at(1).get<std::uint64_t>();
    rec.randomizer = r.at("randomizer").get<std::string>();
    rec.noise_mode = r.at("noise_mode").get<std::string>() == "per_user"
                         ? NoiseMode::kPerUser
                         : NoiseMode::kPooled;
    rec.params = ParamsFromJson(r.at("params"));
    rec.dim = r.at("dim").get<std::uint64_t>();
    rec.l2_cap = r.at("l2_cap").get<double>();
    rec.ones_counts = r.at("ones_counts").get<std::vector<std::uint64_t>>();
    rec.seed = r.at("seed").get<std::uint64_t>();
    rec.stream = r.at("stream").get<std::uint64_t>();
    const auto q = r.at("query_point").get<std::vector<double>>();
    rec.query_point = Eigen::Map<const Vec>(q.data(), q.size());
    t.rounds.push_back(std::move(rec));
  }
  return t;
}

}  // namespace shuffle_sco
