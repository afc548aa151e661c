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

#include "mmpt/kernels.hpp"

#include <cmath>
#include <cstdlib>

#include "mmpt/error.hpp"
#include "mmpt/kernels_impl.hpp"

namespace mmpt::kernels {

// ---------------------------------------------------------------------------
// Scalar reference kernels. std::fma keeps multiply-accumulate results
// bit-identical to the FMA units the SIMD variants use.
// ---------------------------------------------------------------------------

namespace scalar {

double dot(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s = std::fma(a[i], b[i], s);
  return s;
}

double vsum(const double* a, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i];
  return s;
}

double vmax(const double* a, size_t n) {
  double m = a[0];
  for (size_t i = 1; i < n; ++i) m = a[i] > m ? a[i] : m;
  return m;
}

void axpy(double a, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void scal(double a, double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) x[i] *= a;
}

void vadd(const double* a, const double* b, double* o, size_t n) {
  for (size_t i = 0; i < n; ++i) o[i] = a[i] + b[i];
}

void vsub(const double* a, const double* b, double* o, size_t n) {
  for (size_t i = 0; i < n; ++i) o[i] = a[i] - b[i];
}

void vmul(const double* a, const double* b, double* o, size_t n) {
  for (size_t i = 0; i < n; ++i) o[i] = a[i] * b[i];
}

void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst) {
  for (size_t i = 0; i < n_out; ++i) {
    double s = 0.0;
    for (size_t j = 0; j < klen; ++j) s = std::fma(src[i + j], k[j], s);
    dst[i] = s;
  }
}

namespace {
void zero_block(double* p, size_t n) {
  for (size_t i = 0; i < n; ++i) p[i] = 0.0;
}
}  // namespace

void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate) {
  if (!accumulate) zero_block(C, m * n);
  for (size_t i = 0; i < m; ++i) {
    double* ci = C + i * n;
    const double* ai = A + i * k;
    for (size_t p = 0; p < k; ++p) {
      double a = ai[p];
      const double* bp = B + p * n;
      for (size_t j = 0; j < n; ++j) ci[j] = std::fma(a, bp[j], ci[j]);
    }
  }
}

void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate) {
  if (!accumulate) zero_block(C, m * n);
  for (size_t p = 0; p < k; ++p) {
    const double* ap = A + p * m;
    const double* bp = B + p * n;
    for (size_t i = 0; i < m; ++i) {
      double a = ap[i];
      double* ci = C + i * n;
      for (size_t j = 0; j < n; ++j) ci[j] = std::fma(a, bp[j], ci[j]);
    }
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

}  // namespace scalar

namespace {

struct Ops {
  double (*dot)(const double*, const double*, size_t);
  double (*vsum)(const double*, size_t);
  double (*vmax)(const double*, size_t);
  void (*axpy)(double, const double*, double*, size_t);
  void (*scal)(double, double*, size_t);
  void (*vadd)(const double*, const double*, double*, size_t);
  void (*vsub)(const double*, const double*, double*, size_t);
  void (*vmul)(const double*, const double*, double*, size_t);
  void (*correlate_valid)(const double*, size_t, const double*, size_t, double*);
  void (*matmul)(size_t, size_t, size_t, const double*, const double*, double*, bool);
  void (*matmul_at_b)(size_t, size_t, size_t, const double*, const double*, double*, bool);
  void (*matmul_a_bt)(size_t, size_t, size_t, const double*, const double*, double*, bool);
};

constexpr Ops kScalarOps = {scalar::dot,  scalar::vsum, scalar::vmax,
                            scalar::axpy, scalar::scal, scalar::vadd,
                            scalar::vsub, scalar::vmul, scalar::correlate_valid,
                            scalar::matmul, scalar::matmul_at_b,
                            scalar::matmul_a_bt};

#if defined(__x86_64__) || defined(_M_X64)
constexpr Ops kAvx2Ops = {avx2::dot,  avx2::vsum, avx2::vmax,
                          avx2::axpy, avx2::scal, avx2::vadd,
                          avx2::vsub, avx2::vmul, avx2::correlate_valid,
                          avx2::matmul, avx2::matmul_at_b, avx2::matmul_a_bt};
#endif
#if defined(__aarch64__)
constexpr Ops kNeonOps = {neon::dot,  neon::vsum, neon::vmax,
                          neon::axpy, neon::scal, neon::vadd,
                          neon::vsub, neon::vmul, neon::correlate_valid,
                          neon::matmul, neon::matmul_at_b, neon::matmul_a_bt};
#endif

bool backend_supported(Backend b) {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Backend::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

const Ops& ops_for(Backend b) {
  switch (b) {
#if defined(__x86_64__) || defined(_M_X64)
    case Backend::avx2:
      return kAvx2Ops;
#endif
#if defined(__aarch64__)
    case Backend::neon:
      return kNeonOps;
#endif
    default:
      return kScalarOps;
  }
}

Backend pick_default() {
  if (const char* env = std::getenv("MMPT_KERNELS")) {
    std::string v(env);
    if (v == "scalar") return Backend::scalar;
    if (v == "avx2" && backend_supported(Backend::avx2)) return Backend::avx2;
    if (v == "neon" && backend_supported(Backend::neon)) return Backend::neon;
  }
  if (backend_supported(Backend::avx2)) return Backend::avx2;
  if (backend_supported(Backend::neon)) return Backend::neon;
  return Backend::scalar;
}

Backend g_backend = pick_default();
const Ops* g_ops = &ops_for(g_backend);

}  // namespace

Backend active_backend() { return g_backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::scalar: return "scalar";
    case Backend::avx2: return "avx2";
    case Backend::neon: return "neon";
  }
  return "?";
}

void set_backend(const std::string& name) {
  Backend b;
  if (name == "auto") {
    b = pick_default();
  } else if (name == "scalar") {
    b = Backend::scalar;
  } else if (name == "avx2") {
    b = Backend::avx2;
  } else if (name == "neon") {
    b = Backend::neon;
  } else {
    throw Error(ErrorCode::domain, "unknown kernel backend: " + name);
  }
  if (!backend_supported(b))
    throw Error(ErrorCode::domain,
                std::string("kernel backend not supported on this CPU: ") +
                    backend_name(b));
  g_backend = b;
  g_ops = &ops_for(b);
}

double dot(const double* a, const double* b, size_t n) { return g_ops->dot(a, b, n); }
double vsum(const double* a, size_t n) { return g_ops->vsum(a, n); }
double vmax(const double* a, size_t n) { return g_ops->vmax(a, n); }
void axpy(double a, const double* x, double* y, size_t n) { g_ops->axpy(a, x, y, n); }
void scal(double a, double* x, size_t n) { g_ops->scal(a, x, n); }
void vadd(const double* a, const double* b, double* o, size_t n) { g_ops->vadd(a, b, o, n); }
void vsub(const double* a, const double* b, double* o, size_t n) { g_ops->vsub(a, b, o, n); }
void vmul(const double* a, const double* b, double* o, size_t n) { g_ops->vmul(a, b, o, n); }
void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst) {
  g_ops->correlate_valid(src, n_out, k, klen, dst);
}

void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate) {
  g_ops->matmul(m, k, n, A, B, C, accumulate);
}

void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate) {
  g_ops->matmul_at_b(m, k, n, A, B, C, accumulate);
}

void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate) {
  g_ops->matmul_a_bt(m, k, n, A, B, C, accumulate);
}

}  // namespace mmpt::kernels
