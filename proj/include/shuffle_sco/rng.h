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

#ifndef SHUFFLE_SCO_RNG_H_
#define SHUFFLE_SCO_RNG_H_

#include <cstdint>
#include <random>

namespace shuffle_sco {

// Deterministic random source identified by (seed, stream). Equal pairs give
// identical draw sequences; distinct streams are decorrelated by hashing the
// pair through SplitMix64 before seeding the engine. Not thread-safe: each
// worker owns its instance.
class SeededRng {
 public:
  using result_type = std::mt19937_64::result_type;

  explicit SeededRng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  // Independent generator for a sub-stream (round, user, trial, ...).
  SeededRng Child(std::uint64_t sub_stream) const;

  double Uniform();  // [0, 1)
  bool Bernoulli(double p);
  std::uint64_t Binomial(std::uint64_t trials, double p);
  double Gaussian(double stddev);
  std::uint64_t UniformIndex(std::uint64_t n);  // [0, n)

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace shuffle_sco

#endif  // SHUFFLE_SCO_RNG_H_
