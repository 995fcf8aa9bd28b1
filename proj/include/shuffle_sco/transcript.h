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

#ifndef SHUFFLE_SCO_TRANSCRIPT_H_
#define SHUFFLE_SCO_TRANSCRIPT_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shuffle_sco/accountant.h"
#include "shuffle_sco/core.h"
#include "shuffle_sco/scalar_sum.h"

namespace shuffle_sco {

enum class Interactivity { kSequential, kFull };

// Half-open range of user indices [begin, end).
struct UserRange {
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::uint64_t size() const { return end - begin; }
  bool operator==(const UserRange&) const = default;
};

// One shuffle round: who participated, which randomizer with which
// parameters, the per-coordinate 1-message counts, the (seed, stream) that
// drove the randomizers and the point at which gradients were queried.
struct RoundRecord {
  std::uint64_t round = 0;
  UserRange users;
  std::string randomizer = "vector_sum";
  NoiseMode noise_mode = NoiseMode::kPooled;
  ScalarSumParams params;
  std::uint64_t dim = 0;
  double l2_cap = 0.0;
  std::vector<std::uint64_t> ones_counts;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  Vec query_point;
};

struct Transcript {
  Interactivity mode = Interactivity::kSequential;
  std::vector<RoundRecord> rounds;

  // True when no user index appears in two rounds.
  bool SequentiallyDisjoint() const;
};

// Sequential: consecutive disjoint blocks of the given sizes; throws when they
// exceed n. Full: every round gets all n users, one round per entry.
std::vector<UserRange> AllocateUsers(std::uint64_t n, Interactivity mode,
                                     std::span<const std::uint64_t> round_sizes);

std::string TranscriptToJson(const Transcript& transcript);
Transcript TranscriptFromJson(std::string_view json);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_TRANSCRIPT_H_
