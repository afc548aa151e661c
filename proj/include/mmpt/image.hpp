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

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace mmpt {

// Single-channel intensity raster in [0, 1], row-major, f64 throughout.
struct GrayImage {
  size_t height = 0;
  size_t width = 0;
  std::vector<double> data;

  GrayImage() = default;
  GrayImage(size_t h, size_t w, double fill = 0.0)
      : height(h), width(w), data(h * w, fill) {}

  double& at(size_t r, size_t c) { return data[r * width + c]; }
  double at(size_t r, size_t c) const { return data[r * width + c]; }
  size_t size() const { return data.size(); }
};

// Regular square-patch tiling of an image; patches index row-major.
struct PatchGrid {
  size_t patch_size = 0;
  size_t rows = 0;
  size_t cols = 0;
  size_t image_height = 0;
  size_t image_width = 0;

  size_t num_patches() const { return rows * cols; }
  size_t patch_dim() const { return patch_size * patch_size; }
  // Top-left pixel of patch p.
  size_t patch_row(size_t p) const { return (p / cols) * patch_size; }
  size_t patch_col(size_t p) const { return (p % cols) * patch_size; }
};

// Loads an 8-bit grayscale PNG or PGM (P5), normalizes to [0,1] and
// bilinearly resamples (half-pixel centers) to target_size x target_size.
GrayImage load_image(const std::string& path, size_t target_size);

// Raw 8-bit grayscale decode without resizing, values already in [0,1].
GrayImage read_gray8(const std::string& path);

// Writers quantize with round-half-up to maxval 255.
void write_pgm(const GrayImage& img, const std::string& path);
void write_png(const GrayImage& img, const std::string& path);

// Bilinear resampling with half-pixel centers and edge clamping.
GrayImage resize_bilinear(const GrayImage& src, size_t out_h, size_t out_w);

// Row-major flattened patches, one row of `out` per patch.
std::vector<double> patchify(const GrayImage& img, size_t patch_size,
                             PatchGrid* grid);
GrayImage unpatchify(const std::vector<double>& patches, const PatchGrid& grid);

}  // namespace mmpt
