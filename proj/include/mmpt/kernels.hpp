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
#include <string>

namespace mmpt::kernels {

// f64 inner loops behind everything numeric. Scalar reference kernels are
// the ground truth; AVX2 (x86) and NEON (aarch64) variants are selected at
// runtime and equivalence-tested against them.
//
// Contracts the tests rely on:
//  - elementwise kernels (vadd/vsub/vmul/scal) and axpy-composed kernels
//    (axpy, matmul, matmul_at_b, correlate_valid) are bit-identical across
//    backends: all backends use fused multiply-add and the same
//    accumulation order per output element;
//  - reduction kernels (dot, vsum, matmul_a_bt) may reassociate and are
//    equivalent only up to f64 rounding.

enum class Backend { scalar, avx2, neon };

Backend active_backend();
const char* backend_name(Backend b);

// Selects a backend explicitly ("scalar"/"avx2"/"neon"/"auto"); throws
// Error(domain) if the CPU lacks it. Default is the best supported one;
// the MMPT_KERNELS environment variable overrides at startup.
void set_backend(const std::string& name);

double dot(const double* a, const double* b, size_t n);
double vsum(const double* a, size_t n);
double vmax(const double* a, size_t n);

void axpy(double a, const double* x, double* y, size_t n);   // y += a*x
void scal(double a, double* x, size_t n);                    // x *= a
void vadd(const double* a, const double* b, double* o, size_t n);
void vsub(const double* a, const double* b, double* o, size_t n);
void vmul(const double* a, const double* b, double* o, size_t n);

// C (+)= A * B, row-major; A m-by-k, B k-by-n, C m-by-n.
void matmul(size_t m, size_t k, size_t n, const double* A, const double* B,
            double* C, bool accumulate);
// C (+)= A^T * B; A k-by-m, B k-by-n, C m-by-n.
void matmul_at_b(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);
// C (+)= A * B^T; A m-by-k, B n-by-k, C m-by-n.
void matmul_a_bt(size_t m, size_t k, size_t n, const double* A,
                 const double* B, double* C, bool accumulate);

// dst[i] = sum_j src[i+j] * k[j]; src has n_out + klen - 1 elements.
void correlate_valid(const double* src, size_t n_out, const double* k,
                     size_t klen, double* dst);

}  // namespace mmpt::kernels
