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

#include <cstddef>
#include <span>

namespace locmagic::detail {

/// In-place unnormalized Walsh-Hadamard transform; a.size() must be a power of two.
/// out[z] = sum_n a[n] * (-1)^{popcount(z & n)}.
template <typename T>
void fwht(std::span<T> a) {
  const std::size_t n = a.size();
  if (n >= 2) {
    for (std::size_t i = 0; i < n; i += 2) {
      const T u = a[i];
      const T v = a[i + 1];
      a[i] = u + v;
      a[i + 1] = u - v;
    }
  }
  for (std::size_t h = 2; h < n; h <<= 1) {
    for (std::size_t i = 0; i < n; i += 2 * h) {
      T* lo = a.data() + i;
      T* hi = lo + h;
      for (std::size_t j = 0; j < h; ++j) {
        const T u = lo[j];
        const T v = hi[j];
        lo[j] = u + v;
        hi[j] = u - v;
      }
    }
  }
}

/// Insert a zero bit at position `bit` of `v`.
inline std::size_t insert_zero_bit(std::size_t v, int bit) {
  const std::size_t low = v & ((std::size_t{1} << bit) - 1);
  return ((v >> bit) << (bit + 1)) | low;
}

/// Remove bit `bit` from `v`, shifting the higher bits down.
inline std::size_t remove_bit(std::size_t v, int bit) {
  const std::size_t low = v & ((std::size_t{1} << bit) - 1);
  return ((v >> (bit + 1)) << bit) | low;
}

}  // namespace locmagic::detail
