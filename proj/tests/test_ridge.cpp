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

#include <cmath>
#include <filesystem>

#include "mmpt/error.hpp"
#include "mmpt/ridge.hpp"
#include "mmpt/rng.hpp"
#include "testutil.hpp"

using namespace mmpt;

namespace {

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

GrayImage horizontal_line(size_t n, size_t row, double bg, double fg) {
  GrayImage img(n, n, bg);
  for (size_t c = 0; c < n; ++c) img.at(row, c) = fg;
  return img;
}

}  // namespace

TEST_CASE("kernel radius and moment conditions") {
  for (double sigma : {0.7, 1.0, 1.3, 2.0, 2.6, 3.7}) {
    int r = int(std::ceil(3.0 * sigma));
    auto k0 = gaussian_derivative_kernel(sigma, 0);
    auto k1 = gaussian_derivative_kernel(sigma, 1);
    auto k2 = gaussian_derivative_kernel(sigma, 2);
    CHECK(int(k0.size()) == 2 * r + 1);
    CHECK(int(k1.size()) == 2 * r + 1);
    CHECK(int(k2.size()) == 2 * r + 1);

    double m0 = 0, m1 = 0, m2 = 0, k1sum = 0, k2sum = 0;
    for (int i = -r; i <= r; ++i) {
      m0 += k0[i + r];
      k1sum += k1[i + r];
      m1 += i * k1[i + r];
      k2sum += k2[i + r];
      m2 += double(i) * i * k2[i + r];
    }
    CHECK(std::abs(m0 - 1.0) < 1e-12);
    CHECK(std::abs(k1sum) < 1e-9);
    CHECK(std::abs(m1 + 1.0) < 1e-9);
    CHECK(std::abs(k2sum) < 1e-9);
    CHECK(std::abs(m2 - 2.0) < 1e-9);

    // odd / even symmetry, exact
    for (int i = 1; i <= r; ++i) {
      CHECK(k1[r - i] == -k1[r + i]);
      CHECK(k2[r - i] == k2[r + i]);
    }
    CHECK(k1[r] == 0.0);
  }
}

TEST_CASE("order-0 center value matches dense Gaussian quadrature") {
  // Z renormalizes the truncated sampled Gaussian; the density value
  // 1/sqrt(2*pi) comes from numeric integration, not from a closed form.
  auto k0 = gaussian_derivative_kernel(1.0, 0);
  double integral = testutil::simpson(
      [](double x) { return std::exp(-0.5 * x * x); }, -12.0, 12.0, 40000);
  double density0 = 1.0 / integral;  // = 1/sqrt(2 pi)
  CHECK(density0 == doctest::Approx(0.3989422804).epsilon(1e-9));
  double Z = 0.0;
  for (int i = -3; i <= 3; ++i) Z += std::exp(-0.5 * i * i) * density0;
  CHECK(k0[3] == doctest::Approx(density0 / Z).epsilon(1e-9));
}

TEST_CASE("kernel domain errors") {
  CHECK_THROWS_AS(gaussian_derivative_kernel(0.0, 0), Error);
  CHECK_THROWS_AS(gaussian_derivative_kernel(-1.0, 2), Error);
  CHECK_THROWS_AS(gaussian_derivative_kernel(1.0, 3), Error);
}

TEST_CASE("constant image has a zero hessian and zero response") {
  GrayImage img(16, 16, 0.37);
  for (double sigma : {1.0, 2.0}) {
    HessianField h = hessian_at_scale(img, sigma);
    for (size_t i = 0; i < img.size(); ++i) {
      CHECK(std::abs(h.ixx.data[i]) < 1e-10);
      CHECK(std::abs(h.ixy.data[i]) < 1e-10);
      CHECK(std::abs(h.iyy.data[i]) < 1e-10);
    }
    ResponseMap r = meijering_response(img, sigma);
    for (double v : r.data.data) CHECK(v == 0.0);
  }
}

TEST_CASE("quadratic ramp has analytic second derivatives") {
  size_t n = 32;
  GrayImage ramp(n, n), xy(n, n);
  for (size_t y = 0; y < n; ++y)
    for (size_t x = 0; x < n; ++x) {
      ramp.at(y, x) = 0.5 * double(x) * double(x);
      xy.at(y, x) = double(x) * double(y);
    }
  for (double sigma : {1.0, 2.0}) {
    double s2 = sigma * sigma;
    HessianField h = hessian_at_scale(ramp, sigma);
    HessianField hxy = hessian_at_scale(xy, sigma);
    for (size_t y = 12; y < 20; ++y)
      for (size_t x = 12; x < 20; ++x) {
        CHECK(h.ixx.at(y, x) == doctest::Approx(s2).epsilon(1e-3));
        CHECK(std::abs(h.iyy.at(y, x)) < 1e-3 * s2);
        CHECK(hxy.ixy.at(y, x) == doctest::Approx(s2).epsilon(1e-3));
      }
  }
}

TEST_CASE("eigenvalues: diagonal, zero, and hand-solved cases") {
  EigenPair e = eigenvalues_2x2(2.0, 0.0, -5.0);
  CHECK(e.lambda1 == doctest::Approx(2.0));
  CHECK(e.lambda2 == doctest::Approx(-5.0));

  e = eigenvalues_2x2(0.0, 0.0, 0.0);
  CHECK(e.lambda1 == 0.0);
  CHECK(e.lambda2 == 0.0);

  // [[1,2],[2,1]]: characteristic polynomial x^2 - 2x - 3 = (x-3)(x+1)
  e = eigenvalues_2x2(1.0, 2.0, 1.0);
  CHECK(e.lambda1 == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(e.lambda2 == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("eigenvalue trace and determinant consistency on random inputs") {
  for (int t = 0; t < 500; ++t) {
    double ixx = 4.0 * rng::uniform(1, 100, 3 * t) - 2.0;
    double ixy = 4.0 * rng::uniform(1, 100, 3 * t + 1) - 2.0;
    double iyy = 4.0 * rng::uniform(1, 100, 3 * t + 2) - 2.0;
    EigenPair e = eigenvalues_2x2(ixx, ixy, iyy);
    CHECK(std::abs(e.lambda1) <= std::abs(e.lambda2) + 1e-15);
    CHECK(e.lambda1 + e.lambda2 == doctest::Approx(ixx + iyy).epsilon(1e-9));
    CHECK(e.lambda1 * e.lambda2 ==
          doctest::Approx(ixx * iyy - ixy * ixy).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("non-finite hessian entries are a domain error") {
  CHECK_THROWS_AS(eigenvalues_2x2(std::nan(""), 0.0, 0.0), Error);
  CHECK_THROWS_AS(eigenvalues_2x2(0.0, INFINITY, 0.0), Error);
}

TEST_CASE("response for the 3-4-5 eigen pair") {
  EigenPair e = eigenvalues_2x2(3.0, 0.0, -4.0);
  CHECK(e.lambda1 == doctest::Approx(3.0));
  CHECK(e.lambda2 == doctest::Approx(-4.0));
  CHECK(response_from_eigen(e) == doctest::Approx(5.0).epsilon(1e-12));
  // positive large eigenvalue kills the response
  CHECK(response_from_eigen(eigenvalues_2x2(-3.0, 0.0, 4.0)) == 0.0);
}

TEST_CASE("bright line responds at its center, dark line does not") {
  GrayImage bright = horizontal_line(32, 16, 0.0, 1.0);
  ResponseMap r = meijering_response(bright, 1.0);

  // Implementation: center row response dominates rows 5+ pixels away.
  double center = 0.0, far = 0.0;
  for (size_t c = 8; c < 24; ++c) {
    center += r.data.at(16, c);
    far += r.data.at(21, c);
  }
  CHECK(center > far * 5.0);

  // Independent brute-force finite-difference oracle agrees on the shape.
  GrayImage oracle = testutil::oracle_response(bright, 1.0);
  double ocenter = 0.0, ofar = 0.0;
  for (size_t c = 8; c < 24; ++c) {
    ocenter += oracle.at(16, c);
    ofar += oracle.at(21, c);
  }
  CHECK(ocenter > ofar * 5.0);

  GrayImage dark = horizontal_line(32, 16, 1.0, 0.0);
  ResponseMap rd = meijering_response(dark, 1.0);
  for (size_t c = 8; c < 24; ++c) CHECK(rd.data.at(16, c) == 0.0);
}

TEST_CASE("multiscale response: max semantics and scale bookkeeping") {
  GrayImage img = horizontal_line(32, 10, 0.05, 0.9);
  ResponseMap single = meijering_response(img, 2.0);
  ResponseMap multi = multiscale_response(img, {2.0});
  CHECK(multi.data.data == single.data.data);
  CHECK(multi.scales == std::vector<double>{2.0});

  GrayImage flat(16, 16, 0.2);
  ResponseMap all = multiscale_response(flat, {1.0, 2.0, 4.0});
  for (double v : all.data.data) CHECK(v == 0.0);

  ResponseMap a = meijering_response(img, 1.0);
  ResponseMap b = meijering_response(img, 4.0);
  ResponseMap ab = multiscale_response(img, {1.0, 4.0});
  for (size_t i = 0; i < ab.data.size(); ++i)
    CHECK(ab.data.data[i] == std::max(a.data.data[i], b.data.data[i]));

  CHECK_THROWS_AS(multiscale_response(img, {}), Error);
}

TEST_CASE("wide bar prefers the matching scale") {
  GrayImage bar(32, 32, 0.0);
  for (size_t r = 13; r < 19; ++r)
    for (size_t c = 0; c < 32; ++c) bar.at(r, c) = 1.0;
  ResponseMap r1 = meijering_response(bar, 1.0);
  ResponseMap r4 = meijering_response(bar, 4.0);
  double m1 = 0.0, m4 = 0.0;
  for (size_t r = 14; r < 18; ++r)
    for (size_t c = 8; c < 24; ++c) {
      m1 += r1.data.at(r, c);
      m4 += r4.data.at(r, c);
    }
  CHECK(m4 > m1);
}

TEST_CASE("vertical and horizontal lines agree after rotation") {
  GrayImage v(32, 32, 0.0);
  for (size_t r = 0; r < 32; ++r) v.at(r, 16) = 1.0;
  GrayImage h = horizontal_line(32, 15, 0.0, 1.0);
  ResponseMap rv = multiscale_response(v, {1.0, 2.0});
  ResponseMap rh = multiscale_response(h, {1.0, 2.0});
  // rot90 ccw maps (r,c) -> (n-1-c, r): column 16 lands on row 15.
  for (size_t r = 0; r < 32; ++r)
    for (size_t c = 0; c < 32; ++c)
      CHECK(rv.data.at(r, c) ==
            doctest::Approx(rh.data.at(31 - c, r)).epsilon(1e-6).scale(1.0));
}

TEST_CASE("nonnegativity and branch correctness on random smooth images") {
  for (int t = 0; t < 5; ++t) {
    GrayImage img = testutil::blurred_noise(16, 1.0, 50 + t);
    for (double sigma : {1.0, 2.0}) {
      HessianField hf = hessian_at_scale(img, sigma);
      ResponseMap r = meijering_response(img, sigma);
      for (size_t i = 0; i < img.size(); ++i) {
        CHECK(r.data.data[i] >= 0.0);
        EigenPair e = eigenvalues_2x2(hf.ixx.data[i], hf.ixy.data[i], hf.iyy.data[i]);
        if (e.lambda2 > 0.0) CHECK(r.data.data[i] == 0.0);
      }
    }
  }
}

TEST_CASE("hessian matches central differences of the blurred image") {
  // 16x16 Gaussian-blurred noise; agreement within 1e-2 relative error in
  // the finite-difference-valid interior.
  for (double sigma : {1.5, 1.7}) {
    for (int t = 0; t < 20; ++t) {
      GrayImage img = testutil::blurred_noise(16, 1.5, 900 + t);
      HessianField impl = hessian_at_scale(img, sigma);
      testutil::OracleHessian fd = testutil::oracle_fd_hessian(img, sigma);
      const GrayImage* impl_planes[3] = {&impl.ixx, &impl.iyy, &impl.ixy};
      const GrayImage* fd_planes[3] = {&fd.ixx, &fd.iyy, &fd.ixy};
      for (int plane = 0; plane < 3; ++plane) {
        std::vector<double> diff, base;
        for (size_t y = 1; y + 1 < img.height; ++y)
          for (size_t x = 1; x + 1 < img.width; ++x) {
            diff.push_back(impl_planes[plane]->at(y, x) - fd_planes[plane]->at(y, x));
            base.push_back(fd_planes[plane]->at(y, x));
          }
        CHECK(l2(diff) / l2(base) < 1e-2);
      }
    }
  }
}

TEST_CASE("raw response dump round trip") {
  GrayImage img = horizontal_line(16, 8, 0.1, 0.9);
  ResponseMap r = multiscale_response(img, {1.0, 2.0});
  auto path = (std::filesystem::temp_directory_path() / "mmpt_resp.f64").string();
  write_response_raw(r, path);
  ResponseMap back = read_response_raw(path);
  CHECK(back.data.height == 16);
  CHECK(back.data.width == 16);
  CHECK(back.data.data == r.data.data);
}

TEST_CASE("response visualization rescales by the maximum") {
  GrayImage img = horizontal_line(16, 8, 0.0, 1.0);
  ResponseMap r = meijering_response(img, 1.0);
  GrayImage vis = response_to_image(r);
  double mx = 0.0;
  for (double v : vis.data) mx = std::max(mx, v);
  CHECK(mx == doctest::Approx(1.0));

  ResponseMap zero = meijering_response(GrayImage(8, 8, 0.5), 1.0);
  GrayImage zvis = response_to_image(zero);
  for (double v : zvis.data) CHECK(v == 0.0);
}
