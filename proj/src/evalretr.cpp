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

#include "mmpt/evalretr.hpp"

#include <algorithm>
#include <numeric>

#include <json.hpp>

#include "mmpt/checkpoint.hpp"
#include "mmpt/error.hpp"
#include "mmpt/kernels.hpp"

namespace mmpt {

RetrievalResult eval_retrieval(ModelParams& params, const Dataset& eval_data,
                               size_t k) {
  size_t n = eval_data.samples.size();
  if (k == 0) throw Error(ErrorCode::config, "k must be >= 1");
  if (n < k)
    throw Error(ErrorCode::config,
                "need at least k held-out pairs (k=" + std::to_string(k) +
                    ", pairs=" + std::to_string(n) + ")");

  Tensor z_im(n, params.cfg.proj_dim), z_txt(n, params.cfg.proj_dim);
  for (size_t i = 0; i < n; ++i) {
    Graph g;
    const Sample& s = eval_data.samples[i];
    NodeId fi = encode_image(g, params, s.patches_raw, nullptr);
    NodeId ft = encode_text(g, params, s.tokens.ids);
    NodeId zi = g.l2_normalize_rows(linear(g, g.rows(fi, 0, 1), params.proj_image));
    NodeId zt = g.l2_normalize_rows(linear(g, g.rows(ft, 0, 1), params.proj_text));
    std::copy(g.val(zi).data.begin(), g.val(zi).data.end(), z_im.row(i));
    std::copy(g.val(zt).data.begin(), g.val(zt).data.end(), z_txt.row(i));
  }

  Tensor sim(n, n);
  kernels::matmul_a_bt(n, params.cfg.proj_dim, n, z_im.data.data(),
                       z_txt.data.data(), sim.data.data(), false);

  auto top_k = [n, k](auto score_of) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&score_of](size_t a, size_t b) {
                       return score_of(a) > score_of(b);
                     });
    order.resize(k);
    return order;
  };

  size_t i2t = 0, t2i = 0;
  for (size_t q = 0; q < n; ++q) {
    const std::string& truth = eval_data.samples[q].text;
    for (size_t cand : top_k([&sim, q](size_t j) { return sim.at(q, j); })) {
      if (eval_data.samples[cand].text == truth) {
        ++i2t;
        break;
      }
    }
    for (size_t cand : top_k([&sim, q](size_t i) { return sim.at(i, q); })) {
      if (eval_data.samples[cand].text == truth) {
        ++t2i;
        break;
      }
    }
  }

  RetrievalResult r;
  r.pairs = n;
  r.k = k;
  r.i2t_recall = static_cast<double>(i2t) / n;
  r.t2i_recall = static_cast<double>(t2i) / n;
  r.chance = 1.0 / static_cast<double>(n);
  return r;
}

RetrievalResult eval_retrieval_files(const RunConfig& cfg,
                                     const std::string& checkpoint_path,
                                     const std::string& vocab_path,
                                     const std::string& eval_dir, size_t k) {
  Vocabulary vocab = Vocabulary::load(vocab_path);
  Dataset eval_data = load_dataset(eval_dir, cfg, &vocab);

  ModelParams params;
  params.cfg.image_size = cfg.image_size;
  params.cfg.patch_size = cfg.patch_size;
  params.cfg.dim = cfg.dim;
  params.cfg.proj_dim = cfg.proj_dim;
  params.cfg.blocks = cfg.blocks;
  params.cfg.cross_blocks = cfg.cross_blocks;
  params.cfg.heads = cfg.heads;
  params.cfg.vocab_size = vocab.size();
  params.cfg.max_len = cfg.max_len;
  params.init(cfg.seed);
  AdamW opt;
  load_checkpoint(checkpoint_path, params, opt, cfg.hash());
  return eval_retrieval(params, eval_data, k);
}

std::string retrieval_json(const RetrievalResult& r) {
  nlohmann::ordered_json j;
  j["pairs"] = r.pairs;
  j["k"] = r.k;
  j["i2t_recall"] = r.i2t_recall;
  j["t2i_recall"] = r.t2i_recall;
  j["chance"] = r.chance;
  return j.dump();
}

}  // namespace mmpt
