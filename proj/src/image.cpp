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

#include "mmpt/image.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "mmpt/error.hpp"

namespace mmpt {

namespace {

constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

uint8_t quantize255(double v) {
  double q = std::floor(v * 255.0 + 0.5);
  return static_cast<uint8_t>(std::clamp(q, 0.0, 255.0));
}

GrayImage read_pgm(std::ifstream& in, const std::string& path) {
  auto next_token = [&in, &path]() {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) throw Error(ErrorCode::format, "truncated PGM header: " + path);
      if (c == '#') {
        while (c != EOF && c != '\n') c = in.get();
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok.push_back(static_cast<char>(c));
    }
  };
  std::string magic = next_token();
  if (magic != "P5")
    throw Error(ErrorCode::format, "expected PGM magic P5, got " + magic);
  size_t w = std::stoul(next_token());
  size_t h = std::stoul(next_token());
  unsigned long maxval = std::stoul(next_token());
  if (w == 0 || h == 0) throw Error(ErrorCode::format, "empty PGM: " + path);
  if (maxval == 0 || maxval > 255)
    throw Error(ErrorCode::format,
                "PGM maxval " + std::to_string(maxval) + " is not 8-bit: " + path);
  std::vector<unsigned char> raw(w * h);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<size_t>(in.gcount()) != raw.size())
    throw Error(ErrorCode::format, "truncated PGM pixel data: " + path);
  GrayImage img(h, w);
  for (size_t i = 0; i < raw.size(); ++i)
    img.data[i] = raw[i] / static_cast<double>(maxval);
  return img;
}

struct PngReadCloser {
  png_structp png = nullptr;
  png_infop info = nullptr;
  FILE* fp = nullptr;
  ~PngReadCloser() {
    if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    if (fp) std::fclose(fp);
  }
};

GrayImage read_png_file(const std::string& path) {
  PngReadCloser ctx;
  ctx.fp = std::fopen(path.c_str(), "rb");
  if (!ctx.fp) throw Error(ErrorCode::io, "cannot open " + path);
  ctx.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!ctx.png) throw Error(ErrorCode::io, "libpng init failed");
  ctx.info = png_create_info_struct(ctx.png);
  if (!ctx.info) throw Error(ErrorCode::io, "libpng init failed");
  if (setjmp(png_jmpbuf(ctx.png)))
    throw Error(ErrorCode::format, "corrupt PNG: " + path);
  png_init_io(ctx.png, ctx.fp);
  png_read_info(ctx.png, ctx.info);

  int color_type = png_get_color_type(ctx.png, ctx.info);
  int bit_depth = png_get_bit_depth(ctx.png, ctx.info);
  int channels = png_get_channels(ctx.png, ctx.info);
  if (color_type != PNG_COLOR_TYPE_GRAY)
    throw Error(ErrorCode::format,
                "expected 1-channel grayscale PNG, got " +
                    std::to_string(channels) + " channel(s): " + path);
  if (bit_depth != 8)
    throw Error(ErrorCode::format,
                "expected 8-bit PNG, got " + std::to_string(bit_depth) +
                    "-bit: " + path);

  size_t w = png_get_image_width(ctx.png, ctx.info);
  size_t h = png_get_image_height(ctx.png, ctx.info);
  std::vector<unsigned char> raw(w * h);
  std::vector<png_bytep> rows(h);
  for (size_t r = 0; r < h; ++r) rows[r] = raw.data() + r * w;
  png_read_image(ctx.png, rows.data());
  png_read_end(ctx.png, nullptr);

  GrayImage img(h, w);
  for (size_t i = 0; i < raw.size(); ++i) img.data[i] = raw[i] / 255.0;
  return img;
}

}  // namespace

GrayImage read_gray8(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  unsigned char sig[8] = {0};
  in.read(reinterpret_cast<char*>(sig), 8);
  if (in.gcount() >= 2 && sig[0] == 'P' && sig[1] == '5') {
    in.clear();
    in.seekg(0);
    return read_pgm(in, path);
  }
  if (in.gcount() == 8 && std::memcmp(sig, kPngSig, 8) == 0) {
    in.close();
    return read_png_file(path);
  }
  throw Error(ErrorCode::format, "not an 8-bit grayscale PNG or PGM: " + path);
}

GrayImage load_image(const std::string& path, size_t target_size) {
  if (target_size == 0)
    throw Error(ErrorCode::config, "target size must be positive");
  GrayImage img = read_gray8(path);
  if (img.height == target_size && img.width == target_size) return img;
  return resize_bilinear(img, target_size, target_size);
}

GrayImage resize_bilinear(const GrayImage& src, size_t out_h, size_t out_w) {
  GrayImage out(out_h, out_w);
  double sy = static_cast<double>(src.height) / out_h;
  double sx = static_cast<double>(src.width) / out_w;
  for (size_t r = 0; r < out_h; ++r) {
    double fy = (r + 0.5) * sy - 0.5;
    fy = std::clamp(fy, 0.0, static_cast<double>(src.height - 1));
    size_t y0 = static_cast<size_t>(fy);
    size_t y1 = std::min(y0 + 1, src.height - 1);
    double wy = fy - y0;
    for (size_t c = 0; c < out_w; ++c) {
      double fx = (c + 0.5) * sx - 0.5;
      fx = std::clamp(fx, 0.0, static_cast<double>(src.width - 1));
      size_t x0 = static_cast<size_t>(fx);
      size_t x1 = std::min(x0 + 1, src.width - 1);
      double wx = fx - x0;
      double top = src.at(y0, x0) * (1 - wx) + src.at(y0, x1) * wx;
      double bot = src.at(y1, x0) * (1 - wx) + src.at(y1, x1) * wx;
      out.at(r, c) = top * (1 - wy) + bot * wy;
    }
  }
  return out;
}

void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << "P5\n" << img.width << " " << img.height << "\n255\n";
  std::vector<unsigned char> raw(img.size());
  for (size_t i = 0; i < img.size(); ++i) raw[i] = quantize255(img.data[i]);
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw Error(ErrorCode::io, "short write: " + path);
}

void write_png(const GrayImage& img, const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw Error(ErrorCode::io, "cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    if (png) png_destroy_write_struct(&png, info ? &info : nullptr);
    std::fclose(fp);
    throw Error(ErrorCode::io, "libpng init failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw Error(ErrorCode::io, "PNG write failed: " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
               static_cast<png_uint_32>(img.height), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<unsigned char> raw(img.size());
  for (size_t i = 0; i < img.size(); ++i) raw[i] = quantize255(img.data[i]);
  for (size_t r = 0; r < img.height; ++r)
    png_write_row(png, raw.data() + r * img.width);
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  std::fclose(fp);
}

std::vector<double> patchify(const GrayImage& img, size_t patch_size,
                             PatchGrid* grid) {
  if (patch_size == 0 || img.height % patch_size != 0 || img.width % patch_size != 0)
    throw Error(ErrorCode::dimension,
                "patch size " + std::to_string(patch_size) +
                    " does not tile " + std::to_string(img.height) + "x" +
                    std::to_string(img.width));
  PatchGrid g;
  g.patch_size = patch_size;
  g.rows = img.height / patch_size;
  g.cols = img.width / patch_size;
  g.image_height = img.height;
  g.image_width = img.width;
  std::vector<double> out(g.num_patches() * g.patch_dim());
  for (size_t p = 0; p < g.num_patches(); ++p) {
    size_t r0 = g.patch_row(p), c0 = g.patch_col(p);
    double* dst = out.data() + p * g.patch_dim();
    for (size_t r = 0; r < patch_size; ++r)
      for (size_t c = 0; c < patch_size; ++c)
        dst[r * patch_size + c] = img.at(r0 + r, c0 + c);
  }
  if (grid) *grid = g;
  return out;
}

GrayImage unpatchify(const std::vector<double>& patches, const PatchGrid& grid) {
  if (patches.size() != grid.num_patches() * grid.patch_dim())
    throw Error(ErrorCode::dimension, "patch buffer does not match grid");
  GrayImage img(grid.image_height, grid.image_width);
  for (size_t p = 0; p < grid.num_patches(); ++p) {
    size_t r0 = grid.patch_row(p), c0 = grid.patch_col(p);
    const double* src = patches.data() + p * grid.patch_dim();
    for (size_t r = 0; r < grid.patch_size; ++r)
      for (size_t c = 0; c < grid.patch_size; ++c)
        img.at(r0 + r, c0 + c) = src[r * grid.patch_size + c];
  }
  return img;
}

}  // namespace mmpt
