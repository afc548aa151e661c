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
#include <vector>

#include "mmpt/error.hpp"
#include "mmpt/kernels.hpp"
#include "mmpt/kernels_impl.hpp"
#include "mmpt/rng.hpp"

using namespace mmpt;
namespace k = mmpt::kernels;

namespace {

std::vector<double> random_vec(size_t n, uint64_t stream) {
  std::vector<double> v(n);
  for (size_t i = 0; i < n; ++i)
    v[i] = 2.0 * rng::uniform(42, stream, i) - 1.0;
  return v;
}

bool has_simd_backend() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#elif defined(__aarch64__)
  return true;
#else
  return false;
#endif
}

// The sizes cover full vector widths plus every remainder.
const size_t kSizes[] = {1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 63, 64, 65, 257};

}  // namespace

TEST_CASE("scalar backend can always be forced") {
  k::set_backend("scalar");
  CHECK(k::active_backend() == k::Backend::scalar);
  k::set_backend("auto");
}

TEST_CASE("unknown backend is a domain error") {
  CHECK_THROWS_AS(k::set_backend("sse9"), Error);
  k::set_backend("auto");
}

#if defined(__x86_64__) || defined(_M_X64)
#define SIMD_NS k::avx2
#elif defined(__aarch64__)
#define SIMD_NS k::neon
#endif

#ifdef SIMD_NS

TEST_CASE("elementwise and axpy-composed kernels are bit-identical across backends") {
  if (!has_simd_backend()) return;
  for (size_t n : kSizes) {
    auto a = random_vec(n, 1), b = random_vec(n, 2);
    std::vector<double> o1(n), o2(n);

    k::scalar::vadd(a.data(), b.data(), o1.data(), n);
    SIMD_NS::vadd(a.data(), b.data(), o2.data(), n);
    CHECK(o1 == o2);

    k::scalar::vsub(a.data(), b.data(), o1.data(), n);
    SIMD_NS::vsub(a.data(), b.data(), o2.data(), n);
    CHECK(o1 == o2);

    k::scalar::vmul(a.data(), b.data(), o1.data(), n);
    SIMD_NS::vmul(a.data(), b.data(), o2.data(), n);
    CHECK(o1 == o2);

    o1 = a; o2 = a;
    k::scalar::scal(0.7315, o1.data(), n);
    SIMD_NS::scal(0.7315, o2.data(), n);
    CHECK(o1 == o2);

    o1 = b; o2 = b;
    k::scalar::axpy(-1.372, a.data(), o1.data(), n);
    SIMD_NS::axpy(-1.372, a.data(), o2.data(), n);
    CHECK(o1 == o2);

    CHECK(k::scalar::vmax(a.data(), n) == SIMD_NS::vmax(a.data(), n));
  }
}

TEST_CASE("correlate_valid is bit-identical across backends") {
  if (!has_simd_backend()) return;
  for (size_t n : {1ul, 3ul, 8ul, 13ul, 32ul, 61ul}) {
    for (size_t klen : {1ul, 3ul, 7ul, 13ul}) {
      auto src = random_vec(n + klen - 1, 3), kern = random_vec(klen, 4);
      std::vector<double> o1(n), o2(n);
      k::scalar::correlate_valid(src.data(), n, kern.data(), klen, o1.data());
      SIMD_NS::correlate_valid(src.data(), n, kern.data(), klen, o2.data());
      CHECK(o1 == o2);
    }
  }
}

TEST_CASE("reduction kernels agree to f64 rounding") {
  if (!has_simd_backend()) return;
  for (size_t n : kSizes) {
    auto a = random_vec(n, 5), b = random_vec(n, 6);
    double d1 = k::scalar::dot(a.data(), b.data(), n);
    double d2 = SIMD_NS::dot(a.data(), b.data(), n);
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-12));
    double s1 = k::scalar::vsum(a.data(), n);
    double s2 = SIMD_NS::vsum(a.data(), n);
    CHECK(s1 == doctest::Approx(s2).epsilon(1e-12).scale(1.0));
  }
}

TEST_CASE("matmul variants are backend-independent through the dispatcher") {
  if (!has_simd_backend()) return;
  const size_t m = 7, kk = 13, n = 9;
  auto A = random_vec(m * kk, 8), B = random_vec(kk * n, 9);
  auto At = random_vec(kk * m, 10), Bt = random_vec(n * kk, 11);

  std::vector<double> c_simd(m * n), c_scalar(m * n);
  k::set_backend("auto");
  k::matmul(m, kk, n, A.data(), B.data(), c_simd.data(), false);
  k::set_backend("scalar");
  k::matmul(m, kk, n, A.data(), B.data(), c_scalar.data(), false);
  CHECK(c_simd == c_scalar);  // axpy-composed: bit-exact

  k::set_backend("auto");
  k::matmul_at_b(m, kk, n, At.data(), B.data(), c_simd.data(), false);
  k::set_backend("scalar");
  k::matmul_at_b(m, kk, n, At.data(), B.data(), c_scalar.data(), false);
  CHECK(c_simd == c_scalar);

  k::set_backend("auto");
  k::matmul_a_bt(m, kk, n, A.data(), Bt.data(), c_simd.data(), false);
  k::set_backend("scalar");
  k::matmul_a_bt(m, kk, n, A.data(), Bt.data(), c_scalar.data(), false);
  for (size_t i = 0; i < m * n; ++i)
    CHECK(c_simd[i] == doctest::Approx(c_scalar[i]).epsilon(1e-12));
  k::set_backend("auto");
}

#endif  // SIMD_NS

TEST_CASE("matmul matches a naive triple loop") {
  const size_t m = 5, kk = 6, n = 4;
  auto A = random_vec(m * kk, 12), B = random_vec(kk * n, 13);
  std::vector<double> C(m * n), ref(m * n, 0.0);
  k::matmul(m, kk, n, A.data(), B.data(), C.data(), false);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t p = 0; p < kk; ++p)
        ref[i * n + j] += A[i * kk + p] * B[p * n + j];
  for (size_t i = 0; i < m * n; ++i)
    CHECK(C[i] == doctest::Approx(ref[i]).epsilon(1e-13));

  // accumulate adds on top
  k::matmul(m, kk, n, A.data(), B.data(), C.data(), true);
  for (size_t i = 0; i < m * n; ++i)
    CHECK(C[i] == doctest::Approx(2.0 * ref[i]).epsilon(1e-13));
}

TEST_CASE("matmul_at_b and matmul_a_bt match transposed references") {
  const size_t m = 4, kk = 5, n = 3;
  auto A = random_vec(kk * m, 14), B = random_vec(kk * n, 15);
  std::vector<double> C(m * n), ref(m * n, 0.0);
  k::matmul_at_b(m, kk, n, A.data(), B.data(), C.data(), false);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t p = 0; p < kk; ++p)
        ref[i * n + j] += A[p * m + i] * B[p * n + j];
  for (size_t i = 0; i < m * n; ++i)
    CHECK(C[i] == doctest::Approx(ref[i]).epsilon(1e-13));

  auto A2 = random_vec(m * kk, 16), B2 = random_vec(n * kk, 17);
  std::fill(ref.begin(), ref.end(), 0.0);
  k::matmul_a_bt(m, kk, n, A2.data(), B2.data(), C.data(), false);
  for (size_t i = 0; i < m; ++i)
    for (size_t j = 0; j < n; ++j)
      for (size_t p = 0; p < kk; ++p)
        ref[i * n + j] += A2[i * kk + p] * B2[j * kk + p];
  for (size_t i = 0; i < m * n; ++i)
    CHECK(C[i] == doctest::Approx(ref[i]).epsilon(1e-13));
}
