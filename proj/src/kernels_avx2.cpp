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

#include "mmpt/kernels_impl.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

// Function-level target attributes so this file builds without global
// -mavx2; the dispatcher only calls in after a cpuid check.
#define MMPT_AVX2 __attribute__((target("avx2,fma")))

namespace mmpt::kernels::avx2 {

MMPT_AVX2 double dot(const double* a, const double* b, size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  __m256d acc = _mm256_add_pd(acc0, acc1);
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

MMPT_AVX2 double vsum(const double* a, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a + i));
  __m128d lo = _mm256_castpd256_pd128(acc);
  __m128d hi = _mm256_extractf128_pd(acc, 1);
  lo = _mm_add_pd(lo, hi);
  double s = _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
  for (; i < n; ++i) s += a[i];
  return s;
}

MMPT_AVX2 double vmax(const double* a, size_t n) {
  size_t i = 0;
  double m = a[0];
  if (n >= 4) {
    __m256d vm = _mm256_loadu_pd(a);
    for (i = 4; i + 4 <= n; i += 4) vm = _mm256_max_pd(vm, _mm256_loadu_pd(a + i));
    __m128d lo = _mm256_castpd256_pd128(vm);
    __m128d hi = _mm256_extractf128_pd(vm, 1);
    lo = _mm_max_pd(lo, hi);
    m = _mm_cvtsd_f64(_mm_max_sd(lo, _mm_unpackhi_pd(lo, lo)));
  } else {
    i = 1;
  }
  for (; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

MMPT_AVX2 void axpy(double a, const double* x, double* y, size_t n) {
  __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

MMPT_AVX2 void scal(double a, double* x, size_t n) {
  __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

MMPT_AVX2 void vadd(const double* a, const double* b, double* o, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}

MMPT_AVX2 void vsub(const double* a, const double* b, double* o, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}

MMPT_AVX2 void vmul(const double* a, const double* b, double* o, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(o + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}

// Vectorized over outputs; the tap loop stays sequential so each dst[i]
// accumulates in the same order as the scalar reference.
MMPT_AVX2 void correlate_valid(const double* src, size_t n_out, const double* k,
                               size_t klen, double* dst) {
  size_t i = 0;
  for (; i + 4 <= n_out; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (size_t j = 0; j < klen; ++j)
      acc = _mm256_fmadd_pd(_mm256_loadu_pd(src + i + j), _mm256_set1_pd(k[j]), acc);
    _mm256_storeu_pd(dst + i, acc);
  }
  for (; i < n_out; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < klen; ++j) s = std::fma(src[i + j], k[j], s);
    dst[i] = s;
  }
}

// The matmul loops mirror the scalar reference structure: per output
// element the fma accumulation order over p is identical, so matmul and
// matmul_at_b stay bit-exact across backends.

MMPT_AVX2 static void zero_block(double* p, size_t n) {
  __m256d z = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(p + i, z);
  for (; i < n; ++i) p[i] = 0.0;
}

MMPT_AVX2 static void row_axpy(double a, const double* x, double* y, size_t n) {
  __m256d va = _mm256_set1_pd(a);
  size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    __m256d vy = _mm256_loadu_pd(y + j);
    _mm256_storeu_pd(y + j, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + j), vy));
  }
  for (; j < n; ++j) y[j] = std::fma(a, x[j], y[j]);
}

MMPT_AVX2 void matmul(size_t m, size_t k, size_t n, const double* A,
                      const double* B, double* C, bool accumulate) {
  if (!accumulate) zero_block(C, m * n);
  for (size_t i = 0; i < m; ++i) {
    double* ci = C + i * n;
    const double* ai = A + i * k;
    for (size_t p = 0; p < k; ++p) row_axpy(ai[p], B + p * n, ci, n);
  }
}

MMPT_AVX2 void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                           const double* B, double* C, bool accumulate) {
  if (!accumulate) zero_block(C, m * n);
  for (size_t p = 0; p < k; ++p) {
    const double* ap = A + p * m;
    const double* bp = B + p * n;
    for (size_t i = 0; i < m; ++i) row_axpy(ap[i], bp, C + i * n, n);
  }
}

MMPT_AVX2 void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                           const double* B, double* C, bool accumulate) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = A + i * k;
    double* ci = C + i * n;
    size_t j = 0;
    // four B rows at a time share the streamed A row
    for (; j + 4 <= n; j += 4) {
      const double* b0 = B + j * k;
      const double* b1 = B + (j + 1) * k;
      const double* b2 = B + (j + 2) * k;
      const double* b3 = B + (j + 3) * k;
      __m256d acc0 = _mm256_setzero_pd();
      __m256d acc1 = _mm256_setzero_pd();
      __m256d acc2 = _mm256_setzero_pd();
      __m256d acc3 = _mm256_setzero_pd();
      size_t p = 0;
      for (; p + 4 <= k; p += 4) {
        __m256d va = _mm256_loadu_pd(ai + p);
        acc0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b0 + p), acc0);
        acc1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b1 + p), acc1);
        acc2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b2 + p), acc2);
        acc3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b3 + p), acc3);
      }
      // horizontal reduce the four accumulators together
      __m256d t01 = _mm256_hadd_pd(acc0, acc1);  // [a0+a1 lanes...]
      __m256d t23 = _mm256_hadd_pd(acc2, acc3);
      __m256d lo = _mm256_permute2f128_pd(t01, t23, 0x20);
      __m256d hi = _mm256_permute2f128_pd(t01, t23, 0x31);
      __m256d sums = _mm256_add_pd(lo, hi);
      double tail[4] = {0.0, 0.0, 0.0, 0.0};
      for (; p < k; ++p) {
        tail[0] = std::fma(ai[p], b0[p], tail[0]);
        tail[1] = std::fma(ai[p], b1[p], tail[1]);
        tail[2] = std::fma(ai[p], b2[p], tail[2]);
        tail[3] = std::fma(ai[p], b3[p], tail[3]);
      }
      __m256d total = _mm256_add_pd(sums, _mm256_loadu_pd(tail));
      if (accumulate) total = _mm256_add_pd(total, _mm256_loadu_pd(ci + j));
      _mm256_storeu_pd(ci + j, total);
    }
    for (; j < n; ++j) {
      double d = dot(ai, B + j * k, k);
      ci[j] = accumulate ? ci[j] + d : d;
    }
  }
}

}  // namespace mmpt::kernels::avx2

#endif  // x86_64
