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

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "mmpt/tensor.hpp"

namespace mmpt {

// Toy-scale joint image/text model: patch and token embeddings, pre-LN
// transformer encoders per modality, cross-attention encoders fusing the
// two, linear decoders, ITC projection heads, ITM head and a learnable
// temperature. All passes run through Graph so gradients are exact.

struct ModelConfig {
  size_t image_size = 32;
  size_t patch_size = 8;
  size_t dim = 64;
  size_t proj_dim = 32;
  size_t blocks = 2;        // per self-attention encoder
  size_t cross_blocks = 2;  // per cross-attention encoder
  size_t heads = 4;
  size_t mlp_ratio = 4;
  size_t vocab_size = 0;    // set after the vocabulary is built
  size_t max_len = 64;
  double init_std = 0.02;
  double tau_init = 0.07;

  size_t patches_per_side() const { return image_size / patch_size; }
  size_t num_patches() const { return patches_per_side() * patches_per_side(); }
  size_t patch_dim() const { return patch_size * patch_size; }
  void validate() const;
};

struct LinearParams {
  Param w;  // [in, out]
  Param b;  // [1, out]
};

struct NormParams {
  Param gain;  // [1, n]
  Param bias;  // [1, n]
};

struct BlockParams {
  NormParams ln_attn;
  LinearParams q, k, v, o;
  NormParams ln_mlp;
  LinearParams fc1, fc2;
};

struct EncoderParams {
  std::vector<BlockParams> blocks;
  NormParams ln_out;
};

struct ModelParams {
  ModelConfig cfg;

  LinearParams patch_embed;   // patch_dim -> d
  Param cls_token;            // [1, d]
  Param mask_token;           // [1, d]
  Param pos_image;            // [P+1, d]
  Param token_embed;          // [V, d]
  Param pos_text;             // [L, d]
  EncoderParams image_enc;    // f_im
  EncoderParams text_enc;     // f_txt
  EncoderParams cross_image;  // g_im (image queries, text context)
  EncoderParams cross_text;   // g_txt (text queries, image context)
  LinearParams image_decoder; // d -> patch_dim
  LinearParams text_decoder;  // d -> vocab
  LinearParams proj_image;    // d -> proj_dim
  LinearParams proj_text;     // d -> proj_dim
  LinearParams itm_head;      // d -> 2
  Param log_tau;              // [1, 1]

  // Allocates and initializes every parameter: weights N(0, init_std^2)
  // keyed by (seed, fnv1a(name)), biases/offsets 0, norm gains 1,
  // log_tau = log(tau_init).
  void init(uint64_t seed);

  void for_each(const std::function<void(Param&)>& fn);
  void for_each(const std::function<void(const Param&)>& fn) const;
  size_t num_scalars() const;
  double tau() const { return std::exp(log_tau.value.data[0]); }
  void zero_grad();
};

// Sequence features, one row per position; row 0 is the class/start slot.
// encode_image consumes flattened patches [P, patch_dim]; masked patches
// are replaced by the learned mask embedding before position codes.
NodeId encode_image(Graph& g, ModelParams& p, const Tensor& patches,
                    const std::vector<uint8_t>* masked_patches);

// token ids, already MASK-substituted at masked positions. PAD positions
// are excluded as attention keys.
NodeId encode_text(Graph& g, ModelParams& p, const std::vector<int>& ids);

// Cross-modality fusion: queries attend over context. image_query selects
// g_im (image queries, text context) vs g_txt. context_keep optionally
// drops context positions (PAD) as keys.
NodeId cross_encode(Graph& g, ModelParams& p, bool image_query, NodeId query,
                    NodeId context, const std::vector<uint8_t>* context_keep);

// Linear decoders over fused features.
NodeId decode_text(Graph& g, ModelParams& p, NodeId fused);   // [L, V] logits
NodeId decode_image(Graph& g, ModelParams& p, NodeId fused);  // [P, patch_dim]

// Linear layer y = x W + b as graph nodes.
NodeId linear(Graph& g, NodeId x, LinearParams& lp);

// Decoupled-weight-decay Adam; beta1 0.9, beta2 0.999, eps 1e-8. Decay
// touches only parameters flagged Param::decay. Throws Error(training) on
// non-finite gradients. log_tau is clamped to log(1e-3) from below after
// each step.
struct AdamW {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.05;
  uint64_t t = 0;

  void step(ModelParams& params, double lr);
  // Single-tensor update used by the trainer and unit tests.
  void update_param(Param& p, double lr);
};

}  // namespace mmpt
