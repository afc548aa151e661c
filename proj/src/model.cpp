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

#include "mmpt/model.hpp"

#include <cmath>

#include "mmpt/error.hpp"
#include "mmpt/rng.hpp"
#include "mmpt/text.hpp"

namespace mmpt {

void ModelConfig::validate() const {
  if (image_size == 0 || patch_size == 0 || image_size % patch_size != 0)
    throw Error(ErrorCode::config, "patch size must tile the image size");
  if (dim == 0 || heads == 0 || dim % heads != 0)
    throw Error(ErrorCode::config, "heads must divide the model dim");
  if (blocks == 0 || cross_blocks == 0)
    throw Error(ErrorCode::config, "encoders need at least one block");
  if (proj_dim == 0 || mlp_ratio == 0)
    throw Error(ErrorCode::config, "proj_dim and mlp_ratio must be positive");
  if (vocab_size <= Vocabulary::kNumReserved)
    throw Error(ErrorCode::config, "vocabulary not set");
  if (max_len < 2) throw Error(ErrorCode::config, "max_len must be >= 2");
}

namespace {

void init_param(Param& p, const std::string& name, size_t rows, size_t cols,
                uint64_t seed, double std_dev, bool decay, double fill = 0.0) {
  p.name = name;
  p.value = Tensor(rows, cols, fill);
  p.grad = Tensor(rows, cols);
  p.m = Tensor(rows, cols);
  p.v = Tensor(rows, cols);
  p.decay = decay;
  if (std_dev > 0.0) {
    uint64_t stream = rng::stream_for(rng::Stream::param_init, fnv1a(name));
    for (size_t i = 0; i < p.value.size(); ++i)
      p.value.data[i] = std_dev * rng::normal(seed, stream, i);
  }
}

void init_linear(LinearParams& lp, const std::string& name, size_t in,
                 size_t out, uint64_t seed, double std_dev) {
  init_param(lp.w, name + ".w", in, out, seed, std_dev, /*decay=*/true);
  init_param(lp.b, name + ".b", 1, out, seed, 0.0, /*decay=*/false);
}

void init_norm(NormParams& np, const std::string& name, size_t n, uint64_t seed) {
  init_param(np.gain, name + ".g", 1, n, seed, 0.0, /*decay=*/false, 1.0);
  init_param(np.bias, name + ".b", 1, n, seed, 0.0, /*decay=*/false, 0.0);
}

void init_encoder(EncoderParams& enc, const std::string& name, size_t n_blocks,
                  const ModelConfig& cfg, uint64_t seed) {
  enc.blocks.resize(n_blocks);
  for (size_t i = 0; i < n_blocks; ++i) {
    std::string base = name + ".blk" + std::to_string(i);
    BlockParams& b = enc.blocks[i];
    init_norm(b.ln_attn, base + ".ln_attn", cfg.dim, seed);
    init_linear(b.q, base + ".q", cfg.dim, cfg.dim, seed, cfg.init_std);
    init_linear(b.k, base + ".k", cfg.dim, cfg.dim, seed, cfg.init_std);
    init_linear(b.v, base + ".v", cfg.dim, cfg.dim, seed, cfg.init_std);
    init_linear(b.o, base + ".o", cfg.dim, cfg.dim, seed, cfg.init_std);
    init_norm(b.ln_mlp, base + ".ln_mlp", cfg.dim, seed);
    init_linear(b.fc1, base + ".fc1", cfg.dim, cfg.dim * cfg.mlp_ratio, seed,
                cfg.init_std);
    init_linear(b.fc2, base + ".fc2", cfg.dim * cfg.mlp_ratio, cfg.dim, seed,
                cfg.init_std);
  }
  init_norm(enc.ln_out, name + ".ln_out", cfg.dim, seed);
}

void visit_encoder(EncoderParams& enc, const std::function<void(Param&)>& fn) {
  for (auto& b : enc.blocks) {
    fn(b.ln_attn.gain); fn(b.ln_attn.bias);
    fn(b.q.w); fn(b.q.b);
    fn(b.k.w); fn(b.k.b);
    fn(b.v.w); fn(b.v.b);
    fn(b.o.w); fn(b.o.b);
    fn(b.ln_mlp.gain); fn(b.ln_mlp.bias);
    fn(b.fc1.w); fn(b.fc1.b);
    fn(b.fc2.w); fn(b.fc2.b);
  }
  fn(enc.ln_out.gain);
  fn(enc.ln_out.bias);
}

}  // namespace

void ModelParams::init(uint64_t seed) {
  cfg.validate();
  const double s = cfg.init_std;
  init_linear(patch_embed, "patch_embed", cfg.patch_dim(), cfg.dim, seed, s);
  init_param(cls_token, "cls_token", 1, cfg.dim, seed, s, false);
  init_param(mask_token, "mask_token", 1, cfg.dim, seed, s, false);
  init_param(pos_image, "pos_image", cfg.num_patches() + 1, cfg.dim, seed, s, false);
  init_param(token_embed, "token_embed", cfg.vocab_size, cfg.dim, seed, s, false);
  init_param(pos_text, "pos_text", cfg.max_len, cfg.dim, seed, s, false);
  init_encoder(image_enc, "f_im", cfg.blocks, cfg, seed);
  init_encoder(text_enc, "f_txt", cfg.blocks, cfg, seed);
  init_encoder(cross_image, "g_im", cfg.cross_blocks, cfg, seed);
  init_encoder(cross_text, "g_txt", cfg.cross_blocks, cfg, seed);
  init_linear(image_decoder, "d_im", cfg.dim, cfg.patch_dim(), seed, s);
  init_linear(text_decoder, "d_txt", cfg.dim, cfg.vocab_size, seed, s);
  init_linear(proj_image, "proj_im", cfg.dim, cfg.proj_dim, seed, s);
  init_linear(proj_text, "proj_txt", cfg.dim, cfg.proj_dim, seed, s);
  init_linear(itm_head, "itm", cfg.dim, 2, seed, s);
  init_param(log_tau, "log_tau", 1, 1, seed, 0.0, false, std::log(cfg.tau_init));
}

void ModelParams::for_each(const std::function<void(Param&)>& fn) {
  fn(patch_embed.w); fn(patch_embed.b);
  fn(cls_token);
  fn(mask_token);
  fn(pos_image);
  fn(token_embed);
  fn(pos_text);
  visit_encoder(image_enc, fn);
  visit_encoder(text_enc, fn);
  visit_encoder(cross_image, fn);
  visit_encoder(cross_text, fn);
  fn(image_decoder.w); fn(image_decoder.b);
  fn(text_decoder.w); fn(text_decoder.b);
  fn(proj_image.w); fn(proj_image.b);
  fn(proj_text.w); fn(proj_text.b);
  fn(itm_head.w); fn(itm_head.b);
  fn(log_tau);
}

void ModelParams::for_each(const std::function<void(const Param&)>& fn) const {
  const_cast<ModelParams*>(this)->for_each(
      [&fn](Param& p) { fn(static_cast<const Param&>(p)); });
}

size_t ModelParams::num_scalars() const {
  size_t n = 0;
  for_each([&n](const Param& p) { n += p.value.size(); });
  return n;
}

void ModelParams::zero_grad() {
  for_each([](Param& p) { p.grad.zero(); });
}

NodeId linear(Graph& g, NodeId x, LinearParams& lp) {
  return g.add_rowvec(g.matmul(x, g.param(lp.w)), g.param(lp.b));
}

namespace {

// Multi-head softmax attention; query [Lq,d], key/value source [Lc,d].
NodeId attention(Graph& g, ModelParams& p, BlockParams& blk, NodeId query,
                 NodeId kv, const std::vector<uint8_t>* key_keep) {
  size_t heads = p.cfg.heads;
  size_t dh = p.cfg.dim / heads;
  NodeId q = linear(g, query, blk.q);
  NodeId k = linear(g, kv, blk.k);
  NodeId v = linear(g, kv, blk.v);
  std::vector<double> key_bias;
  if (key_keep) {
    key_bias.resize(key_keep->size());
    for (size_t i = 0; i < key_bias.size(); ++i)
      key_bias[i] = (*key_keep)[i] ? 0.0 : -1e9;
  }
  std::vector<NodeId> head_out;
  head_out.reserve(heads);
  for (size_t h = 0; h < heads; ++h) {
    NodeId qh = g.cols(q, h * dh, (h + 1) * dh);
    NodeId kh = g.cols(k, h * dh, (h + 1) * dh);
    NodeId vh = g.cols(v, h * dh, (h + 1) * dh);
    NodeId scores = g.scale(g.matmul_nt(qh, kh), 1.0 / std::sqrt(double(dh)));
    if (key_keep) scores = g.add_colbias_const(scores, key_bias);
    NodeId probs = g.softmax_rows(scores);
    head_out.push_back(g.matmul(probs, vh));
  }
  NodeId merged = heads == 1 ? head_out[0] : g.concat_cols(head_out);
  return linear(g, merged, blk.o);
}

NodeId mlp(Graph& g, BlockParams& blk, NodeId x) {
  return linear(g, g.gelu(linear(g, x, blk.fc1)), blk.fc2);
}

// Pre-LN block: x += Attn(LN(x), ctx); x += MLP(LN(x)).
NodeId run_block(Graph& g, ModelParams& p, BlockParams& blk, NodeId x,
                 NodeId ctx, const std::vector<uint8_t>* key_keep) {
  NodeId normed = g.layer_norm(x, g.param(blk.ln_attn.gain), g.param(blk.ln_attn.bias));
  NodeId kv = ctx >= 0 ? ctx : normed;
  x = g.add(x, attention(g, p, blk, normed, kv, key_keep));
  NodeId normed2 = g.layer_norm(x, g.param(blk.ln_mlp.gain), g.param(blk.ln_mlp.bias));
  return g.add(x, mlp(g, blk, normed2));
}

NodeId run_encoder(Graph& g, ModelParams& p, EncoderParams& enc, NodeId x,
                   NodeId ctx, const std::vector<uint8_t>* key_keep) {
  for (auto& blk : enc.blocks) x = run_block(g, p, blk, x, ctx, key_keep);
  return g.layer_norm(x, g.param(enc.ln_out.gain), g.param(enc.ln_out.bias));
}

}  // namespace

NodeId encode_image(Graph& g, ModelParams& p, const Tensor& patches,
                    const std::vector<uint8_t>* masked_patches) {
  if (patches.rows != p.cfg.num_patches() || patches.cols != p.cfg.patch_dim())
    throw Error(ErrorCode::dimension, "encode_image: patch tensor mismatch");
  NodeId emb = linear(g, g.input(patches), p.patch_embed);
  if (masked_patches) {
    if (masked_patches->size() != patches.rows)
      throw Error(ErrorCode::dimension, "encode_image: mask length mismatch");
    emb = g.replace_rows(emb, *masked_patches, g.param(p.mask_token));
  }
  NodeId seq = g.concat_rows({g.param(p.cls_token), emb});
  seq = g.add(seq, g.param(p.pos_image));
  return run_encoder(g, p, p.image_enc, seq, -1, nullptr);
}

NodeId encode_text(Graph& g, ModelParams& p, const std::vector<int>& ids) {
  if (ids.size() != p.cfg.max_len)
    throw Error(ErrorCode::dimension, "encode_text: sequence length mismatch");
  NodeId emb = g.embedding(g.param(p.token_embed), ids);
  NodeId seq = g.add(emb, g.param(p.pos_text));
  std::vector<uint8_t> keep(ids.size());
  for (size_t i = 0; i < ids.size(); ++i)
    keep[i] = ids[i] == Vocabulary::kPad ? 0 : 1;
  return run_encoder(g, p, p.text_enc, seq, -1, &keep);
}

NodeId cross_encode(Graph& g, ModelParams& p, bool image_query, NodeId query,
                    NodeId context, const std::vector<uint8_t>* context_keep) {
  EncoderParams& enc = image_query ? p.cross_image : p.cross_text;
  NodeId x = query;
  for (auto& blk : enc.blocks) x = run_block(g, p, blk, x, context, context_keep);
  return g.layer_norm(x, g.param(enc.ln_out.gain), g.param(enc.ln_out.bias));
}

NodeId decode_text(Graph& g, ModelParams& p, NodeId fused) {
  return linear(g, fused, p.text_decoder);
}

NodeId decode_image(Graph& g, ModelParams& p, NodeId fused) {
  NodeId patch_rows = g.rows(fused, 1, p.cfg.num_patches() + 1);
  return linear(g, patch_rows, p.image_decoder);
}

void AdamW::update_param(Param& p, double lr) {
  double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  double wd = p.decay ? weight_decay : 0.0;
  for (size_t i = 0; i < p.value.size(); ++i) {
    double gr = p.grad.data[i];
    if (!std::isfinite(gr))
      throw Error(ErrorCode::training, "non-finite gradient in " + p.name);
    p.m.data[i] = beta1 * p.m.data[i] + (1.0 - beta1) * gr;
    p.v.data[i] = beta2 * p.v.data[i] + (1.0 - beta2) * gr * gr;
    double mhat = p.m.data[i] / bc1;
    double vhat = p.v.data[i] / bc2;
    p.value.data[i] -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * p.value.data[i]);
  }
}

void AdamW::step(ModelParams& params, double lr) {
  ++t;
  params.for_each([this, lr](Param& p) { update_param(p, lr); });
  // temperature floor
  double& lt = params.log_tau.value.data[0];
  lt = std::max(lt, std::log(1e-3));
}

}  // namespace mmpt
