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

#include "mmpt/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mmpt/error.hpp"
#include "mmpt/rng.hpp"

namespace mmpt {

namespace {

constexpr double kWeightEps = 1e-8;

// Weighted sampling without replacement via exponential keys
// (Efraimidis-Spirakis): keep the `count` items with the smallest E_i/w_i.
// The E_i stream is shared with the uniform sampler so equal weights give
// the identical selection.
std::vector<uint8_t> select_by_keys(size_t total, size_t count,
                                    const std::vector<double>* weights,
                                    uint64_t seed, uint64_t stream) {
  std::vector<uint8_t> picked(total, 0);
  if (count >= total) {
    std::fill(picked.begin(), picked.end(), 1);
    return picked;
  }
  if (count == 0) return picked;
  std::vector<std::pair<double, size_t>> keys(total);
  for (size_t i = 0; i < total; ++i) {
    double e = rng::exponential(seed, stream, i);
    double key = weights ? e / (*weights)[i] : e;
    keys[i] = {key, i};
  }
  std::partial_sort(keys.begin(), keys.begin() + count, keys.end());
  for (size_t i = 0; i < count; ++i) picked[keys[i].second] = 1;
  return picked;
}

}  // namespace

std::vector<double> patch_mean_response(const PatchGrid& grid,
                                        const ResponseMap& response) {
  if (response.data.height != grid.image_height ||
      response.data.width != grid.image_width)
    throw Error(ErrorCode::dimension, "response map does not match patch grid");
  std::vector<double> w(grid.num_patches(), 0.0);
  double inv = 1.0 / static_cast<double>(grid.patch_dim());
  for (size_t p = 0; p < grid.num_patches(); ++p) {
    size_t r0 = grid.patch_row(p), c0 = grid.patch_col(p);
    double s = 0.0;
    for (size_t r = 0; r < grid.patch_size; ++r)
      for (size_t c = 0; c < grid.patch_size; ++c)
        s += response.data.at(r0 + r, c0 + c);
    w[p] = s * inv;
  }
  return w;
}

PatchMask random_patch_mask(const PatchGrid& grid, double ratio, uint64_t seed,
                            uint64_t stream) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw Error(ErrorCode::config, "mask ratio must be in [0,1]");
  PatchMask m;
  m.grid = grid;
  m.ratio_requested = ratio;
  m.seed = seed;
  size_t count = round_half_up_count(ratio, grid.num_patches());
  m.masked = select_by_keys(grid.num_patches(), count, nullptr, seed,
                            rng::stream_for(rng::Stream::image_mask, stream));
  return m;
}

PatchMask filter_guided_mask(const PatchGrid& grid, const ResponseMap& response,
                             double ratio, uint64_t seed, uint64_t stream) {
  if (!(ratio >= 0.0 && ratio <= 1.0))
    throw Error(ErrorCode::config, "mask ratio must be in [0,1]");
  std::vector<double> w = patch_mean_response(grid, response);
  for (double& v : w) v += kWeightEps;
  PatchMask m;
  m.grid = grid;
  m.ratio_requested = ratio;
  m.seed = seed;
  size_t count = round_half_up_count(ratio, grid.num_patches());
  m.masked = select_by_keys(grid.num_patches(), count, &w, seed,
                            rng::stream_for(rng::Stream::image_mask, stream));
  return m;
}

GrayImage apply_image_mask(const GrayImage& img, const PatchMask& mask,
                           double fill) {
  const PatchGrid& g = mask.grid;
  if (g.image_height != img.height || g.image_width != img.width)
    throw Error(ErrorCode::dimension, "mask grid does not match image");
  GrayImage out = img;
  for (size_t p = 0; p < g.num_patches(); ++p) {
    if (!mask.masked[p]) continue;
    size_t r0 = g.patch_row(p), c0 = g.patch_col(p);
    for (size_t r = 0; r < g.patch_size; ++r)
      for (size_t c = 0; c < g.patch_size; ++c)
        out.at(r0 + r, c0 + c) = fill;
  }
  return out;
}

TokenMask text_mask(const TokenSequence& tokens, bool paired_with_image,
                    uint64_t seed, uint64_t stream) {
  TokenMask m;
  m.ratio_requested = paired_with_image ? 0.30 : 0.15;
  m.seed = seed;
  std::vector<size_t> maskable;
  for (size_t i = 0; i < tokens.ids.size(); ++i)
    if (tokens.maskable[i]) maskable.push_back(i);
  if (maskable.empty()) return m;
  size_t count =
      std::max<size_t>(1, round_half_up_count(m.ratio_requested, maskable.size()));
  auto picked = select_by_keys(maskable.size(), count, nullptr, seed,
                               rng::stream_for(rng::Stream::text_mask, stream));
  for (size_t i = 0; i < maskable.size(); ++i)
    if (picked[i]) m.positions.push_back(maskable[i]);
  return m;
}

}  // namespace mmpt
