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

#include <cstdint>
#include <optional>
#include <vector>

#include "mmpt/tensor.hpp"

namespace mmpt {

// The three pre-training objectives as graph builders. Each returns a
// scalar node; gradients come from Graph::backward.

// Per-step scalar summary; total is the unit-weight sum of the parts.
struct LossReport {
  double mvlm_text = 0.0;
  double mvlm_image = 0.0;
  double itc = 0.0;
  double itm = 0.0;
  double total = 0.0;
  double tau = 0.0;
  size_t masked_pixel_count = 0;  // Omega summed over the batch
  bool itm_skipped = false;       // batch of one has no negatives
};

// Masked-text cross-entropy term: mean over masked positions of
// CE(target token, softmax(logits)). logits [L,V].
NodeId mvlm_text_loss(Graph& g, NodeId text_logits,
                      const std::vector<int>& target_ids,
                      const std::vector<uint8_t>& masked_positions);

// Masked-image L1 term: (1/omega) * sum over masked patches of
// |target - recon|, omega = patch_dim * masked patch count.
NodeId mvlm_image_loss(Graph& g, NodeId image_recon, const Tensor& target_patches,
                       const std::vector<uint8_t>& masked_patches);

// Symmetric InfoNCE over L2-normalized rows; z_im/z_txt [N, d_proj],
// inv_tau a positive 1x1 node (1/tau). Exact batch form:
//   -(1/N) sum_k [ log softmax_col_k(S)_kk + log softmax_row_k(S)_kk ],
// with S = z_im z_txt^T / tau.
NodeId itc_loss(Graph& g, NodeId z_im, NodeId z_txt, NodeId inv_tau);

// ITM: elementwise product of cross features -> linear head -> 2-way CE.
// rows of z_cross_* correspond to candidate pairs; labels hold 1 for
// matched, 0 for mismatched.
NodeId itm_loss(Graph& g, NodeId fused_product_logits,
                const std::vector<int>& labels);

// Uniform in-batch negative text index per sample, never the sample
// itself; deterministic in (seed, step).
std::vector<size_t> negative_pairing(size_t batch_size, uint64_t seed,
                                     uint64_t step);

// Sum of parts with unit weights, plus the serialized JSON line
// {step, mvlm_text, mvlm_image, itc, itm, total, tau}.
LossReport total_loss(double mvlm_text, double mvlm_image, double itc,
                      double itm, double tau, size_t omega, bool itm_skipped);
std::string loss_report_json(uint64_t step, const LossReport& r);

}  // namespace mmpt
