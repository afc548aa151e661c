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

// Per-backend kernel variants. Only the dispatcher in kernels.cpp and the
// equivalence tests reach in here.

namespace mmpt::kernels {

namespace scalar {
double dot(const double* a, const double* b, size_t n);
double vsum(const double* a, size_t n);
double vmax(const double* a, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void scal(double a, double* x, size_t n);
void vadd(const double* a, const double* b, double* o, size_t n);
void vsub(const double* a, const double* b, double* o, size_t n);
void vmul(const double* a, const double* b, double* o, size_t n);
void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst);
void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate);
void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, size_t n);
double vsum(const double* a, size_t n);
double vmax(const double* a, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void scal(double a, double* x, size_t n);
void vadd(const double* a, const double* b, double* o, size_t n);
void vsub(const double* a, const double* b, double* o, size_t n);
void vmul(const double* a, const double* b, double* o, size_t n);
void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst);
void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate);
void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
}  // namespace avx2
#endif

#if defined(__aarch64__)
namespace neon {
double dot(const double* a, const double* b, size_t n);
double vsum(const double* a, size_t n);
double vmax(const double* a, size_t n);
void axpy(double a, const double* x, double* y, size_t n);
void scal(double a, double* x, size_t n);
void vadd(const double* a, const double* b, double* o, size_t n);
void vsub(const double* a, const double* b, double* o, size_t n);
void vmul(const double* a, const double* b, double* o, size_t n);
void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst);
void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate);
void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
}  // namespace neon
#endif

}  // namespace mmpt::kernels
