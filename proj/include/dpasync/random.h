// Copyright 2026 The dpasync Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPASYNC_RANDOM_H_
#define DPASYNC_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dpasync {

using Rng = std::mt19937_64;

// Stream tags used when fanning a master seed out to sub-streams.
enum class StreamTag : std::uint64_t {
  kSchedule = 1,
  kOwnerNoise = 2,
  kRun = 3,
  kData = 4,
};

// splitmix64 finalizer.
constexpr std::uint64_t MixSeed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic seed derivation: hash(master, parts...). Order matters.
inline std::uint64_t DeriveSeed(std::uint64_t master,
                                std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = MixSeed(master);
  for (std::uint64_t p : parts) h = MixSeed(h ^ MixSeed(p));
  return h;
}

inline Rng MakeStream(std::uint64_t master, StreamTag tag,
                      std::initializer_list<std::uint64_t> parts = {}) {
  std::uint64_t h = DeriveSeed(master, {static_cast<std::uint64_t>(tag)});
  for (std::uint64_t p : parts) h = MixSeed(h ^ MixSeed(p));
  return Rng(h);
}

// Uniform double in [0, 1) with 53 random bits.
inline double Uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace dpasync

#endif  // DPASYNC_RANDOM_H_
