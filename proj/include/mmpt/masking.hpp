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

#include <cmath>
#include <cstdint>
#include <vector>

#include "mmpt/image.hpp"
#include "mmpt/ridge.hpp"
#include "mmpt/text.hpp"

namespace mmpt {

// Masked-patch selection over a PatchGrid. Deterministic in
// (inputs, seed, stream); the masked count is always
// round_half_up(ratio * num_patches).
struct PatchMask {
  PatchGrid grid;
  std::vector<uint8_t> masked;  // one flag per patch
  double ratio_requested = 0.0;
  uint64_t seed = 0;

  size_t count() const {
    size_t n = 0;
    for (uint8_t m : masked) n += m;
    return n;
  }
};

// Masked token positions, strictly increasing, never on special tokens.
struct TokenMask {
  std::vector<size_t> positions;
  double ratio_requested = 0.0;
  uint64_t seed = 0;
};

inline size_t round_half_up_count(double ratio, size_t total) {
  return static_cast<size_t>(std::floor(ratio * static_cast<double>(total) + 0.5));
}

// Uniform sample without replacement of round_half_up(ratio * patches).
// `stream` separates independent uses of one seed (e.g. per sample/step).
PatchMask random_patch_mask(const PatchGrid& grid, double ratio, uint64_t seed,
                            uint64_t stream = 0);

// Response-weighted sample without replacement: patch weight = mean
// response over the patch + 1e-8, drawn via exponential keys. A flat
// response reproduces random_patch_mask exactly (same seed path).
PatchMask filter_guided_mask(const PatchGrid& grid, const ResponseMap& response,
                             double ratio, uint64_t seed, uint64_t stream = 0);

// Replaces masked patches by `fill`; everything else unchanged.
GrayImage apply_image_mask(const GrayImage& img, const PatchMask& mask,
                           double fill = 0.5);

// Masked-token selection: ratio 0.30 when paired with an image else 0.15,
// at least one masked token whenever any position is maskable.
TokenMask text_mask(const TokenSequence& tokens, bool paired_with_image,
                    uint64_t seed, uint64_t stream = 0);

// Mean response per patch (the filter_guided_mask weights, without eps).
std::vector<double> patch_mean_response(const PatchGrid& grid,
                                        const ResponseMap& response);

}  // namespace mmpt
