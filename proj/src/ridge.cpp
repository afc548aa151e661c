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

#include "mmpt/ridge.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>

#include "mmpt/error.hpp"
#include "mmpt/kernels.hpp"

namespace mmpt {

namespace {

std::vector<double> sampled_gaussian(double sigma, int radius) {
  std::vector<double> g(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
    g[i + radius] = v;
    sum += v;
  }
  for (double& v : g) v /= sum;
  return g;
}

// Mirror index without edge repeat: -1 -> 1, n -> n-2 (period 2n-2).
size_t mirror(long i, long n) {
  if (n == 1) return 0;
  long p = 2 * n - 2;
  i %= p;
  if (i < 0) i += p;
  return static_cast<size_t>(i < n ? i : p - i);
}

}  // namespace

std::vector<double> gaussian_derivative_kernel(double sigma, int order) {
  if (!(sigma > 0.0))
    throw Error(ErrorCode::domain, "sigma must be positive");
  if (order < 0 || order > 2)
    throw Error(ErrorCode::domain, "derivative order must be 0, 1 or 2");
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  if (order == 0) return sampled_gaussian(sigma, radius);

  // Central difference of the radius-(r-1) sampled Gaussian; the result
  // has radius r. Taps are computed for the nonnegative offsets and
  // mirrored so the symmetry is exact in floating point.
  std::vector<double> g = sampled_gaussian(sigma, radius - 1);
  auto g_at = [&g, radius](int j) {
    return std::abs(j) <= radius - 1 ? g[j + radius - 1] : 0.0;
  };
  std::vector<double> k(2 * radius + 1, 0.0);
  if (order == 1) {
    // convolution realizing +d/dx: k[j] = (g[j+1] - g[j-1]) / 2
    for (int j = 1; j <= radius; ++j) {
      double tap = 0.5 * (g_at(j + 1) - g_at(j - 1));
      k[radius + j] = tap;
      k[radius - j] = -tap;
    }
    double m1 = 0.0;
    for (int i = -radius; i <= radius; ++i) m1 += i * k[i + radius];
    for (double& v : k) v *= -1.0 / m1;
  } else {
    // k[j] = g[j-1] - 2 g[j] + g[j+1]
    for (int j = 0; j <= radius; ++j) {
      double tap = (g_at(j - 1) + g_at(j + 1)) - 2.0 * g_at(j);
      k[radius + j] = tap;
      k[radius - j] = tap;
    }
    double m2 = 0.0;
    for (int i = -radius; i <= radius; ++i)
      m2 += static_cast<double>(i) * i * k[i + radius];
    for (double& v : k) v *= 2.0 / m2;
  }
  return k;
}

GrayImage convolve_rows(const GrayImage& img, const std::vector<double>& kernel) {
  int radius = static_cast<int>(kernel.size() / 2);
  // Correlation with the reversed kernel is convolution.
  std::vector<double> flipped(kernel.rbegin(), kernel.rend());
  GrayImage out(img.height, img.width);
  std::vector<double> padded(img.width + 2 * radius);
  for (size_t r = 0; r < img.height; ++r) {
    const double* row = img.data.data() + r * img.width;
    for (long i = -radius; i < static_cast<long>(img.width) + radius; ++i)
      padded[i + radius] = row[mirror(i, static_cast<long>(img.width))];
    kernels::correlate_valid(padded.data(), img.width, flipped.data(),
                             flipped.size(), out.data.data() + r * img.width);
  }
  return out;
}

GrayImage convolve_cols(const GrayImage& img, const std::vector<double>& kernel) {
  int radius = static_cast<int>(kernel.size() / 2);
  std::vector<double> flipped(kernel.rbegin(), kernel.rend());
  GrayImage out(img.height, img.width);
  // Work column-strips through a transposed scratch row to keep the inner
  // loop contiguous.
  std::vector<double> padded(img.height + 2 * radius);
  std::vector<double> result(img.height);
  for (size_t c = 0; c < img.width; ++c) {
    for (long i = -radius; i < static_cast<long>(img.height) + radius; ++i)
      padded[i + radius] = img.at(mirror(i, static_cast<long>(img.height)), c);
    kernels::correlate_valid(padded.data(), img.height, flipped.data(),
                             flipped.size(), result.data());
    for (size_t r = 0; r < img.height; ++r) out.at(r, c) = result[r];
  }
  return out;
}

namespace {

// Exact central-difference stencils with mirror boundary. Splitting the
// derivative kernels into blur + difference keeps constant inputs at an
// exact zero: the blur of a constant is a bitwise-constant plane, and the
// stencils cancel constants exactly.
enum class Stencil { d1, d2 };

double apply_stencil(double lo, double mid, double hi, Stencil s) {
  // convolution semantics: d1 realizes +d/dx as (f[x+1] - f[x-1]) / 2
  return s == Stencil::d1 ? 0.5 * (hi - lo) : (hi + lo) - 2.0 * mid;
}

GrayImage stencil_rows(const GrayImage& img, Stencil s) {
  GrayImage out(img.height, img.width);
  long w = static_cast<long>(img.width);
  for (size_t r = 0; r < img.height; ++r)
    for (long c = 0; c < w; ++c)
      out.at(r, c) = apply_stencil(img.at(r, mirror(c - 1, w)), img.at(r, c),
                                   img.at(r, mirror(c + 1, w)), s);
  return out;
}

GrayImage stencil_cols(const GrayImage& img, Stencil s) {
  GrayImage out(img.height, img.width);
  long hgt = static_cast<long>(img.height);
  for (long r = 0; r < hgt; ++r)
    for (size_t c = 0; c < img.width; ++c)
      out.at(r, c) = apply_stencil(img.at(mirror(r - 1, hgt), c), img.at(r, c),
                                   img.at(mirror(r + 1, hgt), c), s);
  return out;
}

}  // namespace

HessianField hessian_at_scale(const GrayImage& img, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::domain, "sigma must be positive");
  int radius = static_cast<int>(std::ceil(3.0 * sigma));
  // Derivative axis: radius-(r-1) blur followed by the difference stencil
  // (totalling radius r, the same operator as the order-1/2 kernels).
  // Smoothing axis: the radius-r order-0 kernel.
  auto g_full = sampled_gaussian(sigma, radius);
  auto g_inner = sampled_gaussian(sigma, std::max(radius - 1, 0));
  HessianField h;
  h.sigma = sigma;
  // x varies along rows (columns index), y along columns (row index).
  h.ixx = stencil_rows(convolve_rows(convolve_cols(img, g_full), g_inner), Stencil::d2);
  h.iyy = stencil_cols(convolve_cols(convolve_rows(img, g_full), g_inner), Stencil::d2);
  // Normalization identities make the difference-of-Gaussian kernels'
  // moment corrections exact, so no rescaling beyond sigma^2 applies.
  GrayImage blur_xy = convolve_rows(convolve_cols(img, g_inner), g_inner);
  h.ixy = stencil_cols(stencil_rows(blur_xy, Stencil::d1), Stencil::d1);
  double s2 = sigma * sigma;
  kernels::scal(s2, h.ixx.data.data(), h.ixx.size());
  kernels::scal(s2, h.iyy.data.data(), h.iyy.size());
  kernels::scal(s2, h.ixy.data.data(), h.ixy.size());
  return h;
}

EigenPair eigenvalues_2x2(double ixx, double ixy, double iyy) {
  if (!std::isfinite(ixx) || !std::isfinite(ixy) || !std::isfinite(iyy))
    throw Error(ErrorCode::domain, "non-finite Hessian entries");
  double mean = 0.5 * (ixx + iyy);
  double disc = std::hypot(0.5 * (ixx - iyy), ixy);
  double a = mean + disc;
  double b = mean - disc;
  EigenPair e;
  if (std::abs(a) > std::abs(b)) {
    e.lambda1 = b;
    e.lambda2 = a;
  } else if (std::abs(b) > std::abs(a)) {
    e.lambda1 = a;
    e.lambda2 = b;
  } else {
    e.lambda1 = std::min(a, b);
    e.lambda2 = std::max(a, b);
  }
  return e;
}

double response_from_eigen(const EigenPair& e) {
  return e.lambda2 > 0.0 ? 0.0 : std::hypot(e.lambda1, e.lambda2);
}

ResponseMap meijering_response(const GrayImage& img, double sigma) {
  HessianField h = hessian_at_scale(img, sigma);
  ResponseMap map;
  map.scales = {sigma};
  map.data = GrayImage(img.height, img.width);
  for (size_t i = 0; i < img.size(); ++i) {
    EigenPair e = eigenvalues_2x2(h.ixx.data[i], h.ixy.data[i], h.iyy.data[i]);
    map.data.data[i] = response_from_eigen(e);
  }
  return map;
}

ResponseMap multiscale_response(const GrayImage& img,
                                const std::vector<double>& scales) {
  if (scales.empty())
    throw Error(ErrorCode::config, "scale list must not be empty");
  ResponseMap out = meijering_response(img, scales[0]);
  for (size_t s = 1; s < scales.size(); ++s) {
    ResponseMap r = meijering_response(img, scales[s]);
    for (size_t i = 0; i < out.data.size(); ++i)
      out.data.data[i] = std::max(out.data.data[i], r.data.data[i]);
  }
  out.scales = scales;
  return out;
}

void write_response_raw(const ResponseMap& map, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  uint32_t h = static_cast<uint32_t>(map.data.height);
  uint32_t w = static_cast<uint32_t>(map.data.width);
  // Dimension header then row-major f64; this code targets little-endian
  // hosts, matching the file format.
  out.write(reinterpret_cast<const char*>(&h), 4);
  out.write(reinterpret_cast<const char*>(&w), 4);
  out.write(reinterpret_cast<const char*>(map.data.data.data()),
            static_cast<std::streamsize>(map.data.size() * sizeof(double)));
  if (!out) throw Error(ErrorCode::io, "short write: " + path);
}

ResponseMap read_response_raw(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  uint32_t h = 0, w = 0;
  in.read(reinterpret_cast<char*>(&h), 4);
  in.read(reinterpret_cast<char*>(&w), 4);
  ResponseMap map;
  map.data = GrayImage(h, w);
  in.read(reinterpret_cast<char*>(map.data.data.data()),
          static_cast<std::streamsize>(map.data.size() * sizeof(double)));
  if (!in) throw Error(ErrorCode::format, "truncated response dump: " + path);
  return map;
}

GrayImage response_to_image(const ResponseMap& map) {
  GrayImage out(map.data.height, map.data.width);
  double mx = map.data.size() ? kernels::vmax(map.data.data.data(), map.data.size()) : 0.0;
  if (mx <= 0.0) return out;
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = map.data.data[i] / mx;
  return out;
}

}  // namespace mmpt
