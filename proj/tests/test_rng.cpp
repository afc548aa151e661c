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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "mmpt/rng.hpp"

using namespace mmpt;

// Published Random123 known-answer vectors for philox4x32-10.
TEST_CASE("philox4x32-10 known answers") {
  auto out = rng::philox4x32({0u, 0u}, {0u, 0u, 0u, 0u});
  CHECK(out[0] == 0x6627e8d5u);
  CHECK(out[1] == 0xe169c58du);
  CHECK(out[2] == 0xbc57ac4cu);
  CHECK(out[3] == 0x9b00dbd8u);

  auto ones = rng::philox4x32({0xffffffffu, 0xffffffffu},
                              {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);

  auto pi = rng::philox4x32({0xa4093822u, 0x299f31d0u},
                            {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u});
  CHECK(pi[0] == 0xd16cfe09u);
  CHECK(pi[1] == 0x94fdccebu);
  CHECK(pi[2] == 0x5001e420u);
  CHECK(pi[3] == 0x24126ea1u);
}

TEST_CASE("draws are pure functions of (seed, stream, counter)") {
  CHECK(rng::bits64(1, 2, 3) == rng::bits64(1, 2, 3));
  CHECK(rng::bits64(1, 2, 3) != rng::bits64(1, 2, 4));
  CHECK(rng::bits64(1, 2, 3) != rng::bits64(1, 3, 3));
  CHECK(rng::bits64(2, 2, 3) != rng::bits64(1, 2, 3));
}

TEST_CASE("uniform lies in the open unit interval") {
  for (uint64_t c = 0; c < 10000; ++c) {
    double u = rng::uniform(9, 1, c);
    CHECK(u > 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("uniform mean is near one half") {
  double s = 0.0;
  const int n = 100000;
  for (int c = 0; c < n; ++c) s += rng::uniform(123, 5, c);
  CHECK(std::abs(s / n - 0.5) < 0.005);
}

TEST_CASE("normal moments") {
  double s = 0.0, s2 = 0.0;
  const int n = 100000;
  for (int c = 0; c < n; ++c) {
    double v = rng::normal(7, 9, c);
    s += v;
    s2 += v * v;
  }
  CHECK(std::abs(s / n) < 0.02);
  CHECK(std::abs(s2 / n - 1.0) < 0.03);
}

TEST_CASE("permutation is a permutation and deterministic") {
  auto p = rng::permutation(11, 22, 257);
  CHECK(p.size() == 257);
  std::set<size_t> seen(p.begin(), p.end());
  CHECK(seen.size() == 257);
  CHECK(*seen.begin() == 0);
  CHECK(*seen.rbegin() == 256);
  CHECK(p == rng::permutation(11, 22, 257));
  CHECK(p != rng::permutation(11, 23, 257));
}
