// Copyright 2026 The locmagic Authors
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

#pragma once

#include <cstdint>

#include "locmagic/common.hpp"

namespace locmagic {

/// Independent random streams carved out of one realization index.
enum class Stream : std::uint64_t {
  kDisorder = 0x0d150d3e,
  kInitialState = 0x57a7e5ee,
  kPauliSampling = 0x5a3b1e55,
  kLanczos = 0x1a7c2052,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seed for (base_seed, realization index, stream). Chained splitmix so that
/// nearby indices and tags land on unrelated seeds.
inline std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index, Stream stream) {
  std::uint64_t s = splitmix64(base_seed);
  s = splitmix64(s ^ index);
  return splitmix64(s ^ static_cast<std::uint64_t>(stream));
}

inline Rng make_rng(std::uint64_t base_seed, std::uint64_t index, Stream stream) {
  return Rng(derive_seed(base_seed, index, stream));
}

}  // namespace locmagic
