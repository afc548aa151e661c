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

#include "mmpt/error.hpp"
#include "mmpt/model.hpp"
#include "mmpt/rng.hpp"
#include "mmpt/text.hpp"
#include "testutil.hpp"

using namespace mmpt;

namespace {

ModelConfig tiny_config() {
  ModelConfig cfg;
  cfg.image_size = 8;
  cfg.patch_size = 4;  // 4 patches
  cfg.dim = 8;
  cfg.proj_dim = 4;
  cfg.blocks = 1;
  cfg.cross_blocks = 1;
  cfg.heads = 2;
  cfg.mlp_ratio = 2;
  cfg.vocab_size = 11;
  cfg.max_len = 6;
  return cfg;
}

Tensor random_patches(const ModelConfig& cfg, uint64_t stream) {
  Tensor t(cfg.num_patches(), cfg.patch_dim());
  for (size_t i = 0; i < t.size(); ++i)
    t.data[i] = rng::uniform(31, stream, i);
  return t;
}

Tensor random_rows(size_t r, size_t c, uint64_t stream) {
  Tensor t(r, c);
  for (size_t i = 0; i < t.size(); ++i)
    t.data[i] = 2.0 * rng::uniform(32, stream, i) - 1.0;
  return t;
}

}  // namespace

TEST_CASE("initialization is deterministic and distinct across parameters") {
  ModelParams a, b;
  a.cfg = tiny_config();
  b.cfg = tiny_config();
  a.init(7);
  b.init(7);
  bool all_equal = true;
  a.for_each([&b, &all_equal](Param& pa) {
    b.for_each([&pa, &all_equal](Param& pb) {
      if (pa.name == pb.name && pa.value.data != pb.value.data) all_equal = false;
    });
  });
  CHECK(all_equal);

  CHECK(a.patch_embed.w.value.data != a.text_decoder.w.value.data);
  CHECK(a.tau() == doctest::Approx(0.07));
  CHECK(a.num_scalars() > 0);

  ModelParams c;
  c.cfg = tiny_config();
  c.init(8);
  CHECK(c.patch_embed.w.value.data != a.patch_embed.w.value.data);
}

TEST_CASE("encoder output shapes") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(1);
  Graph g;
  Tensor patches = random_patches(p.cfg, 1);
  NodeId im = encode_image(g, p, patches, nullptr);
  CHECK(g.val(im).rows == p.cfg.num_patches() + 1);
  CHECK(g.val(im).cols == p.cfg.dim);

  std::vector<int> ids = {Vocabulary::kStart, 4, 5, 6, 0, 0};
  NodeId tx = encode_text(g, p, ids);
  CHECK(g.val(tx).rows == p.cfg.max_len);
  CHECK(g.val(tx).cols == p.cfg.dim);

  NodeId fused = cross_encode(g, p, true, im, tx, nullptr);
  CHECK(g.val(fused).rows == g.val(im).rows);
  NodeId recon = decode_image(g, p, fused);
  CHECK(g.val(recon).rows == p.cfg.num_patches());
  CHECK(g.val(recon).cols == p.cfg.patch_dim());

  NodeId fused_t = cross_encode(g, p, false, tx, im, nullptr);
  NodeId logits = decode_text(g, p, fused_t);
  CHECK(g.val(logits).rows == p.cfg.max_len);
  CHECK(g.val(logits).cols == p.cfg.vocab_size);
}

TEST_CASE("zero weights and zero input produce zero features") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(1);
  p.for_each([](Param& prm) { prm.value.zero(); });
  Graph g;
  Tensor patches(p.cfg.num_patches(), p.cfg.patch_dim());  // zeros
  NodeId im = encode_image(g, p, patches, nullptr);
  for (double v : g.val(im).data) CHECK(v == 0.0);
}

TEST_CASE("deterministic forward: same inputs, same outputs") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(5);
  Tensor patches = random_patches(p.cfg, 2);
  Graph g1, g2;
  NodeId a = encode_image(g1, p, patches, nullptr);
  NodeId b = encode_image(g2, p, patches, nullptr);
  CHECK(g1.val(a).data == g2.val(b).data);
}

TEST_CASE("swapping positional entries of two masked patches preserves unmasked outputs") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(9);
  Tensor patches = random_patches(p.cfg, 3);
  std::vector<uint8_t> masked = {1, 1, 0, 0};

  Graph g1;
  NodeId out1 = encode_image(g1, p, patches, &masked);

  // Swap the positional rows of the two masked patches (rows 1 and 2 of
  // pos_image; row 0 is the class slot). Masked slots carry identical
  // content, so unmasked outputs must not change.
  std::swap_ranges(p.pos_image.value.row(1),
                   p.pos_image.value.row(1) + p.cfg.dim,
                   p.pos_image.value.row(2));
  Graph g2;
  NodeId out2 = encode_image(g2, p, patches, &masked);

  for (size_t r : {0ul, 3ul, 4ul}) {  // class + the two unmasked patches
    for (size_t c = 0; c < p.cfg.dim; ++c)
      CHECK(g1.val(out1).at(r, c) ==
            doctest::Approx(g2.val(out2).at(r, c)).epsilon(1e-12).scale(1.0));
  }

  // Control: swapping positional rows of an unmasked patch changes it.
  std::swap_ranges(p.pos_image.value.row(3),
                   p.pos_image.value.row(3) + p.cfg.dim,
                   p.pos_image.value.row(4));
  Graph g3;
  NodeId out3 = encode_image(g3, p, patches, &masked);
  double diff = 0.0;
  for (size_t c = 0; c < p.cfg.dim; ++c)
    diff += std::abs(g3.val(out3).at(3, c) - g1.val(out1).at(3, c));
  CHECK(diff > 1e-6);
}

TEST_CASE("duplicated context vectors do not change cross attention") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(11);
  Graph g;
  Tensor patches = random_patches(p.cfg, 4);
  NodeId q = encode_image(g, p, patches, nullptr);

  Tensor ctx1 = random_rows(1, p.cfg.dim, 40);
  // context of one vector vs the same vector twice
  Tensor ctx2(2, p.cfg.dim);
  std::copy(ctx1.data.begin(), ctx1.data.end(), ctx2.row(0));
  std::copy(ctx1.data.begin(), ctx1.data.end(), ctx2.row(1));

  NodeId f1 = cross_encode(g, p, true, q, g.input(ctx1), nullptr);
  NodeId f2 = cross_encode(g, p, true, q, g.input(ctx2), nullptr);
  for (size_t i = 0; i < g.val(f1).size(); ++i)
    CHECK(g.val(f1).data[i] ==
          doctest::Approx(g.val(f2).data[i]).epsilon(1e-12).scale(1.0));
}

TEST_CASE("masked patches do not leak pixel content") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(13);
  Tensor patches = random_patches(p.cfg, 5);
  std::vector<uint8_t> masked = {1, 0, 0, 0};

  Graph g1;
  NodeId out1 = encode_image(g1, p, patches, &masked);
  Tensor patches2 = patches;
  for (size_t c = 0; c < p.cfg.patch_dim(); ++c) patches2.at(0, c) += 0.37;
  Graph g2;
  NodeId out2 = encode_image(g2, p, patches2, &masked);
  CHECK(g1.val(out1).data == g2.val(out2).data);
}

TEST_CASE("AdamW: zero gradient and zero decay leave parameters unchanged") {
  Param p;
  p.name = "x";
  p.value = Tensor::scalar(1.25);
  p.grad = Tensor(1, 1);
  p.m = Tensor(1, 1);
  p.v = Tensor(1, 1);
  p.decay = false;
  AdamW opt;
  opt.t = 1;
  opt.update_param(p, 0.1);
  CHECK(p.value.data[0] == 1.25);
}

TEST_CASE("AdamW descends on a quadratic") {
  Param p;
  p.name = "x";
  p.value = Tensor::scalar(1.0);
  p.grad = Tensor(1, 1);
  p.m = Tensor(1, 1);
  p.v = Tensor(1, 1);
  AdamW opt;
  opt.weight_decay = 0.0;
  double x = 1.0;
  for (int i = 0; i < 5; ++i) {
    p.grad.data[0] = 2.0 * p.value.data[0];  // d/dx x^2
    ++opt.t;
    opt.update_param(p, 0.1);
  }
  CHECK(p.value.data[0] < x);
}

TEST_CASE("AdamW matches the two-step recurrence computed directly") {
  // Oracle: the AdamW recurrences evaluated step by step on a scalar.
  const double g1 = 0.5, g2 = -0.25, lr = 0.1, wd = 0.05;
  const double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double x = 1.0, m = 0.0, v = 0.0;
  for (int step = 1; step <= 2; ++step) {
    double grad = step == 1 ? g1 : g2;
    m = b1 * m + (1 - b1) * grad;
    v = b2 * v + (1 - b2) * grad * grad;
    double mhat = m / (1 - std::pow(b1, step));
    double vhat = v / (1 - std::pow(b2, step));
    x -= lr * (mhat / (std::sqrt(vhat) + eps) + wd * x);
  }

  Param p;
  p.name = "x";
  p.value = Tensor::scalar(1.0);
  p.grad = Tensor(1, 1);
  p.m = Tensor(1, 1);
  p.v = Tensor(1, 1);
  p.decay = true;
  AdamW opt;
  opt.weight_decay = wd;
  p.grad.data[0] = g1;
  ++opt.t;
  opt.update_param(p, lr);
  p.grad.data[0] = g2;
  ++opt.t;
  opt.update_param(p, lr);
  CHECK(p.value.data[0] == doctest::Approx(x).epsilon(1e-15));
}

TEST_CASE("AdamW rejects non-finite gradients with a diagnostic") {
  Param p;
  p.name = "bad_param";
  p.value = Tensor::scalar(1.0);
  p.grad = Tensor(1, 1);
  p.grad.data[0] = std::nan("");
  p.m = Tensor(1, 1);
  p.v = Tensor(1, 1);
  AdamW opt;
  opt.t = 1;
  try {
    opt.update_param(p, 0.1);
    FAIL("expected training error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::training);
    CHECK(std::string(e.what()).find("bad_param") != std::string::npos);
  }
}

TEST_CASE("temperature stays above its floor") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(3);
  p.log_tau.value.data[0] = std::log(1e-3) - 5.0;
  AdamW opt;
  p.zero_grad();
  opt.step(p, 0.0);
  CHECK(p.tau() >= 1e-3 - 1e-12);
}

TEST_CASE("full tiny model gradient check at initialization") {
  ModelParams p;
  p.cfg = tiny_config();
  p.init(21);

  Tensor patches = random_patches(p.cfg, 6);
  Tensor target = random_patches(p.cfg, 7);
  std::vector<int> ids = {Vocabulary::kStart, 4, 7, 9, 5, 0};
  std::vector<int> masked_ids = {Vocabulary::kStart, Vocabulary::kMask, 7,
                                 Vocabulary::kMask, 5, 0};
  std::vector<uint8_t> masked_pos = {0, 1, 0, 1, 0, 0};
  std::vector<uint8_t> masked_patches = {1, 0, 1, 0};

  auto build = [&](Graph& g) {
    NodeId im_full = encode_image(g, p, patches, nullptr);
    NodeId im_masked = encode_image(g, p, patches, &masked_patches);
    NodeId tx_full = encode_text(g, p, ids);
    NodeId tx_masked = encode_text(g, p, masked_ids);
    NodeId fused_im = cross_encode(g, p, true, im_masked, tx_full, nullptr);
    NodeId fused_tx = cross_encode(g, p, false, tx_masked, im_full, nullptr);
    NodeId recon = decode_image(g, p, fused_im);
    NodeId logits = decode_text(g, p, fused_tx);
    NodeId ce = g.cross_entropy_rows(logits, ids, masked_pos);
    NodeId l1 = g.l1_masked_rows(recon, target, masked_patches, 32.0);
    NodeId zi = g.l2_normalize_rows(linear(g, g.rows(im_full, 0, 1), p.proj_image));
    NodeId zt = g.l2_normalize_rows(linear(g, g.rows(tx_full, 0, 1), p.proj_text));
    NodeId match = g.sum_all(g.mul(zi, zt));
    NodeId itm_logits = linear(g, g.mul(g.rows(fused_im, 0, 1), g.rows(fused_tx, 0, 1)),
                               p.itm_head);
    std::vector<uint8_t> sel = {1};
    NodeId itm = g.cross_entropy_rows(itm_logits, {1}, sel);
    NodeId tau_term = g.mul_scalar(match, g.exp(g.scale(g.param(p.log_tau), -1.0)));
    return g.add(g.add(ce, l1), g.add(itm, g.sum_all(tau_term)));
  };

  p.zero_grad();
  Graph g;
  NodeId loss = build(g);
  g.backward(loss);
  auto eval = [&]() {
    Graph g2;
    return g2.val(build(g2)).data[0];
  };
  size_t checked = 0, failures = 0;
  p.for_each([&](Param& prm) {
    for (size_t i = 0; i < prm.value.size(); ++i) {
      double fd = testutil::central_diff(&prm.value.data[i], eval, 1e-6);
      double an = prm.grad.data[i];
      ++checked;
      if (std::abs(an - fd) > 1e-6 + 1e-6 * std::max(std::abs(an), std::abs(fd))) {
        ++failures;
        MESSAGE(prm.name << "[" << i << "]: analytic " << an << " fd " << fd);
      }
    }
  });
  CHECK(checked > 1000);
  CHECK(failures == 0);
}
