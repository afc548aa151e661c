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

#include <string>
#include <vector>

#include "mmpt/image.hpp"

namespace mmpt {

// Multi-scale ridge filter: Gaussian-derivative Hessian, closed-form 2x2
// eigenvalues, and the bright-ridge response (0 where the large-magnitude
// eigenvalue is positive, sqrt(l1^2 + l2^2) otherwise).

// Per-pixel second Gaussian derivatives at one scale; ixy serves as both
// off-diagonal entries.
struct HessianField {
  GrayImage ixx, ixy, iyy;
  double sigma = 0.0;
};

// |lambda1| <= |lambda2|; ties broken so lambda1 <= lambda2.
struct EigenPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

struct ResponseMap {
  GrayImage data;          // nonnegative response per pixel
  std::vector<double> scales;
};

// Derivative-of-Gaussian taps, radius ceil(3*sigma), length 2r+1.
// order 0: normalized sampled Gaussian (sum 1).
// order 1: central first difference of the radius-(r-1) sampled Gaussian,
//          normalized so the first moment is exactly -1 (convolution with
//          the kernel realizes +d/dx).
// order 2: central second difference of the same, zero-sum with second
//          moment exactly 2.
std::vector<double> gaussian_derivative_kernel(double sigma, int order);

// True convolution (kernel flipped) along rows/columns with mirror
// boundary (edge pixel not repeated).
GrayImage convolve_rows(const GrayImage& img, const std::vector<double>& kernel);
GrayImage convolve_cols(const GrayImage& img, const std::vector<double>& kernel);

// Separable second derivatives, each plane scale-normalized by sigma^2.
HessianField hessian_at_scale(const GrayImage& img, double sigma);

EigenPair eigenvalues_2x2(double ixx, double ixy, double iyy);

// 0 when the large-magnitude eigenvalue is positive, else the eigenvalue
// magnitude sqrt(l1^2 + l2^2).
double response_from_eigen(const EigenPair& e);

ResponseMap meijering_response(const GrayImage& img, double sigma);
ResponseMap multiscale_response(const GrayImage& img,
                                const std::vector<double>& scales);

// Raw response dump: u32 height, u32 width (little-endian), then
// height*width little-endian f64 values, row-major.
void write_response_raw(const ResponseMap& map, const std::string& path);
ResponseMap read_response_raw(const std::string& path);

// 8-bit visualization rescaled by the map maximum (zero map stays zero).
GrayImage response_to_image(const ResponseMap& map);

}  // namespace mmpt
