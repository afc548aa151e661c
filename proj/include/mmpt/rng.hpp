// Copyright 2026 the mmpt authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace mmpt {

// Counter-based randomness: every draw is a pure function of
// (seed, stream, counter), so samples never depend on call order, batch
// composition, or resume points. The generator is Philox4x32-10.
namespace rng {

// One Philox4x32-10 block. key = {k0, k1}, counter = {c0, c1, c2, c3}.
std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 2>& key,
                                   const std::array<uint32_t, 4>& counter);

// 64 random bits for (seed, stream, counter).
uint64_t bits64(uint64_t seed, uint64_t stream, uint64_t counter);

// Uniform double in the open interval (0, 1).
inline double uniform(uint64_t seed, uint64_t stream, uint64_t counter) {
  return (static_cast<double>(bits64(seed, stream, counter) >> 11) + 0.5) *
         (1.0 / 9007199254740992.0);
}

// Uniform integer in [0, n).
inline uint64_t below(uint64_t seed, uint64_t stream, uint64_t counter,
                      uint64_t n) {
  // 64 bits of entropy against desk-scale n: modulo bias is negligible.
  return bits64(seed, stream, counter) % n;
}

// Standard normal via Box-Muller; one deterministic value per counter.
inline double normal(uint64_t seed, uint64_t stream, uint64_t counter) {
  double u1 = uniform(seed, stream, counter * 2);
  double u2 = uniform(seed, stream, counter * 2 + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

// Exp(1) key used for weighted sampling without replacement.
inline double exponential(uint64_t seed, uint64_t stream, uint64_t counter) {
  return -std::log(uniform(seed, stream, counter));
}

// Fisher-Yates permutation of [0, n), fully determined by (seed, stream).
std::vector<size_t> permutation(uint64_t seed, uint64_t stream, size_t n);

// Purpose tags combined into stream ids; keeps independent uses of the
// same seed on disjoint streams.
enum class Stream : uint64_t {
  image_mask = 1,
  text_mask = 2,
  epoch_shuffle = 3,
  itm_negatives = 4,
  param_init = 5,
  synth = 6,
};

inline uint64_t stream_for(Stream s, uint64_t id) {
  return (static_cast<uint64_t>(s) << 56) ^ id;
}

}  // namespace rng

// FNV-1a, used for config hashes and per-parameter init streams.
inline uint64_t fnv1a(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a(const std::string& s) { return fnv1a(s.data(), s.size()); }

}  // namespace mmpt
