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

#include "shuffle_sco/rng.h"

#include <stdexcept>

namespace shuffle_sco {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {

std::seed_seq MakeSeedSeq(std::uint64_t seed, std::uint64_t stream) {
  const std::uint64_t a = SplitMix64(seed);
  const std::uint64_t b = SplitMix64(a ^ SplitMix64(stream ^ 0xD1B54A32D192ED03ULL));
  return std::seed_seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                       static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
}

}  // namespace

SeededRng::SeededRng(std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  std::seed_seq seq = MakeSeedSeq(seed, stream);
  engine_.seed(seq);
}

SeededRng SeededRng::Child(std::uint64_t sub_stream) const {
  // Children of distinct parents must not collide, so the parent identity is
  // folded into the child's seed.
  return SeededRng(SplitMix64(seed_ ^ SplitMix64(stream_)), sub_stream);
}

double SeededRng::Uniform() {
  return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

bool SeededRng::Bernoulli(double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return Uniform() < p;
}

std::uint64_t SeededRng::Binomial(std::uint64_t trials, double p) {
  if (trials == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return trials;
  return std::binomial_distribution<std::uint64_t>(trials, p)(engine_);
}

double SeededRng::Gaussian(double stddev) {
  if (stddev == 0.0) return 0.0;
  return std::normal_distribution<double>(0.0, stddev)(engine_);
}

std::uint64_t SeededRng::UniformIndex(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("UniformIndex: empty range");
  return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
}

}  // namespace shuffle_sco
