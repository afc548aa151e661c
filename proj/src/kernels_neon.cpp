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

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

// NEON is baseline on aarch64; no runtime feature check needed.

namespace mmpt::kernels::neon {

double dot(const double* a, const double* b, size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  for (; i + 2 <= n; i += 2)
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double vsum(const double* a, size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) acc = vaddq_f64(acc, vld1q_f64(a + i));
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += a[i];
  return s;
}

double vmax(const double* a, size_t n) {
  size_t i = 0;
  double m = a[0];
  if (n >= 2) {
    float64x2_t vm = vld1q_f64(a);
    for (i = 2; i + 2 <= n; i += 2) vm = vmaxq_f64(vm, vld1q_f64(a + i));
    m = vmaxvq_f64(vm);
  } else {
    i = 1;
  }
  for (; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

void axpy(double a, const double* x, double* y, size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scal(double a, double* x, size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_f64(va, vld1q_f64(x + i)));
  for (; i < n; ++i) x[i] *= a;
}

void vadd(const double* a, const double* b, double* o, size_t n) {
  size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] + b[i];
}

void vsub(const double* a, const double* b, double* o, size_t n) {
  size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] - b[i];
}

void vmul(const double* a, const double* b, double* o, size_t n) {
  size_t i = 0;
  for (; i + 2 <= n; i += 2)
    vst1q_f64(o + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) o[i] = a[i] * b[i];
}

void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst) {
  size_t i = 0;
  for (; i + 2 <= n_out; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (size_t j = 0; j < klen; ++j)
      acc = vfmaq_f64(acc, vld1q_f64(src + i + j), vdupq_n_f64(k[j]));
    vst1q_f64(dst + i, acc);
  }
  for (; i < n_out; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < klen; ++j) s = std::fma(src[i + j], k[j], s);
    dst[i] = s;
  }
}

// Same loop structure as the scalar reference per output element; matmul
// and matmul_at_b stay bit-exact across backends.

static void zero_block(double* p, size_t n) {
  float64x2_t z = vdupq_n_f64(0.0);
  size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(p + i, z);
  for (; i < n; ++i) p[i] = 0.0;
}

static void row_axpy(double a, const double* x, double* y, size_t n) {
  float64x2_t va = vdupq_n_f64(a);
  size_t j = 0;
  for (; j + 2 <= n; j += 2)
    vst1q_f64(y + j, vfmaq_f64(vld1q_f64(y + j), va, vld1q_f64(x + j)));
  for (; j < n; ++j) y[j] = std::fma(a, x[j], y[j]);
}

void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate) {
  if (!accumulate) zero_block(C, m * n);
  for (size_t i = 0; i < m; ++i) {
    double* ci = C + i * n;
    const double* ai = A + i * k;
    for (size_t p = 0; p < k; ++p) row_axpy(ai[p], B + p * n, ci, n);
  }
}

void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate) {
  if (!accumulate) zero_block(C, m * n);
  for (size_t p = 0; p < k; ++p) {
    const double* ap = A + p * m;
    const double* bp = B + p * n;
    for (size_t i = 0; i < m; ++i) row_axpy(ap[i], bp, C + i * n, n);
  }
}

void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate) {
  for (size_t i = 0; i < m; ++i) {
    const double* ai = A + i * k;
    double* ci = C + i * n;
    for (size_t j = 0; j < n; ++j) {
      double d = dot(ai, B + j * k, k);
      ci[j] = accumulate ? ci[j] + d : d;
    }
  }
}

}  // namespace mmpt::kernels::neon

#endif  // aarch64
