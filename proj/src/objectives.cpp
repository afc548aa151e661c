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

#include "mmpt/objectives.hpp"

#include <json.hpp>

#include "mmpt/error.hpp"
#include "mmpt/rng.hpp"

namespace mmpt {

NodeId mvlm_text_loss(Graph& g, NodeId text_logits,
                      const std::vector<int>& target_ids,
                      const std::vector<uint8_t>& masked_positions) {
  return g.cross_entropy_rows(text_logits, target_ids, masked_positions);
}

NodeId mvlm_image_loss(Graph& g, NodeId image_recon, const Tensor& target_patches,
                       const std::vector<uint8_t>& masked_patches) {
  size_t masked = 0;
  for (uint8_t m : masked_patches) masked += m;
  if (masked == 0)
    throw Error(ErrorCode::domain, "mvlm_image_loss: no masked patches");
  double omega = static_cast<double>(masked * target_patches.cols);
  return g.l1_masked_rows(image_recon, target_patches, masked_patches, omega);
}

NodeId itc_loss(Graph& g, NodeId z_im, NodeId z_txt, NodeId inv_tau) {
  const Tensor& zi = g.val(z_im);
  const Tensor& zt = g.val(z_txt);
  if (zi.rows != zt.rows || zi.cols != zt.cols)
    throw Error(ErrorCode::dimension, "itc_loss: embedding shape mismatch");
  if (zi.rows == 0) throw Error(ErrorCode::dimension, "itc_loss: empty batch");
  if (!(g.val(inv_tau).data[0] > 0.0))
    throw Error(ErrorCode::domain, "itc_loss: temperature must be positive");
  size_t n = zi.rows;
  // S[a,b] = z_im^a . z_txt^b / tau
  NodeId sim = g.mul_scalar(g.matmul_nt(z_im, z_txt), inv_tau);
  NodeId d = g.diag(sim);                       // [n,1]
  NodeId lse_rows = g.logsumexp_rows(sim);      // over texts for image k
  NodeId lse_cols = g.logsumexp_rows(g.transpose(sim));  // over images for text k
  NodeId per_pair = g.sub(g.add(lse_rows, lse_cols), g.scale(d, 2.0));
  return g.scale(g.sum_all(per_pair), 1.0 / static_cast<double>(n));
}

NodeId itm_loss(Graph& g, NodeId fused_product_logits,
                const std::vector<int>& labels) {
  const Tensor& tl = g.val(fused_product_logits);
  if (tl.cols != 2)
    throw Error(ErrorCode::dimension, "itm_loss: expected binary logits");
  if (labels.size() != tl.rows)
    throw Error(ErrorCode::dimension, "itm_loss: label count mismatch");
  std::vector<uint8_t> all(tl.rows, 1);
  return g.cross_entropy_rows(fused_product_logits, labels, all);
}

std::vector<size_t> negative_pairing(size_t batch_size, uint64_t seed,
                                     uint64_t step) {
  if (batch_size < 2)
    throw Error(ErrorCode::domain, "negative_pairing: batch must have >= 2 samples");
  std::vector<size_t> neg(batch_size);
  uint64_t stream = rng::stream_for(rng::Stream::itm_negatives, 0);
  for (size_t k = 0; k < batch_size; ++k) {
    uint64_t r = rng::below(seed, stream, step * batch_size + k, batch_size - 1);
    neg[k] = r < k ? r : r + 1;  // uniform over the other indices
  }
  return neg;
}

LossReport total_loss(double mvlm_text, double mvlm_image, double itc,
                      double itm, double tau, size_t omega, bool itm_skipped) {
  LossReport r;
  r.mvlm_text = mvlm_text;
  r.mvlm_image = mvlm_image;
  r.itc = itc;
  r.itm = itm;
  r.tau = tau;
  r.masked_pixel_count = omega;
  r.itm_skipped = itm_skipped;
  r.total = mvlm_text + mvlm_image + itc + itm;
  return r;
}

std::string loss_report_json(uint64_t step, const LossReport& r) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["mvlm_text"] = r.mvlm_text;
  j["mvlm_image"] = r.mvlm_image;
  j["itc"] = r.itc;
  j["itm"] = r.itm;
  j["total"] = r.total;
  j["tau"] = r.tau;
  return j.dump();
}

}  // namespace mmpt
