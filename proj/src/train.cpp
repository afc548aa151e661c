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

#include "mmpt/train.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "mmpt/checkpoint.hpp"
#include "mmpt/error.hpp"
#include "mmpt/rng.hpp"

namespace mmpt {

namespace fs = std::filesystem;

Dataset load_dataset(const std::string& dir, const RunConfig& cfg,
                     const Vocabulary* vocab_in) {
  cfg.validate();
  std::string jsonl_path = (fs::path(dir) / "studies.jsonl").string();
  std::ifstream in(jsonl_path);
  if (!in) throw Error(ErrorCode::io, "cannot open " + jsonl_path);

  Dataset data;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Sample s;
    s.study = parse_triplets(line);
    fs::path img_base = fs::path(dir) / "images" / s.study.study_id;
    fs::path img_path = img_base;
    img_path += ".pgm";
    if (!fs::exists(img_path)) {
      img_path = img_base;
      img_path += ".png";
    }
    s.image = load_image(img_path.string(), cfg.image_size);
    s.response = multiscale_response(s.image, cfg.scales);
    data.samples.push_back(std::move(s));
  }
  if (data.samples.empty())
    throw Error(ErrorCode::validation, "no studies in " + jsonl_path);

  for (auto& s : data.samples) s.text = format_report(s.study, cfg.report_format);

  if (vocab_in) {
    data.vocab = *vocab_in;
  } else {
    std::vector<std::string> corpus;
    corpus.reserve(data.samples.size());
    for (const auto& s : data.samples) corpus.push_back(s.text);
    data.vocab = build_vocab(corpus, cfg.min_count);
  }

  for (auto& s : data.samples) {
    s.tokens = encode(s.text, data.vocab, cfg.max_len);
    std::vector<double> raw = patchify(s.image, cfg.patch_size, &data.grid);
    s.patches_raw = Tensor(data.grid.num_patches(), data.grid.patch_dim());
    s.patches_raw.data = raw;
    if (cfg.recon_target == ReconTarget::raw) {
      s.patches_target = s.patches_raw;
    } else {
      std::vector<double> f = patchify(s.response.data, cfg.patch_size, nullptr);
      s.patches_target = Tensor(data.grid.num_patches(), data.grid.patch_dim());
      s.patches_target.data = f;
    }
  }
  return data;
}

std::vector<size_t> batch_indices(uint64_t seed, size_t dataset_size,
                                  size_t batch_size, uint64_t step) {
  std::vector<size_t> out;
  out.reserve(batch_size);
  uint64_t epoch = step * batch_size / dataset_size;
  std::vector<size_t> perm = rng::permutation(
      seed, rng::stream_for(rng::Stream::epoch_shuffle, epoch), dataset_size);
  for (size_t j = 0; j < batch_size; ++j) {
    uint64_t pos = step * batch_size + j;
    uint64_t e = pos / dataset_size;
    if (e != epoch) {
      epoch = e;
      perm = rng::permutation(
          seed, rng::stream_for(rng::Stream::epoch_shuffle, epoch), dataset_size);
    }
    out.push_back(perm[pos % dataset_size]);
  }
  return out;
}

std::unique_ptr<StepGraph> build_step(ModelParams& params, const Dataset& data,
                                      const RunConfig& cfg,
                                      const std::vector<size_t>& batch,
                                      uint64_t step) {
  auto sg = std::make_unique<StepGraph>();
  Graph& g = sg->graph;
  size_t n = batch.size();
  if (n == 0) throw Error(ErrorCode::usage, "empty batch");

  std::vector<NodeId> img_full(n), img_masked(n), txt_full(n), txt_masked(n);
  std::vector<NodeId> proj_rows_im, proj_rows_txt;
  std::vector<std::vector<uint8_t>> txt_keep(n);
  std::vector<const Sample*> samples(n);

  NodeId text_ce_sum = -1;
  NodeId image_l1_sum = -1;
  size_t omega_total = 0;
  size_t text_terms = 0, image_terms = 0;

  for (size_t k = 0; k < n; ++k) {
    const Sample& s = data.samples[batch[k]];
    samples[k] = &s;
    uint64_t mask_stream = (step << 32) ^ static_cast<uint64_t>(batch[k]);

    // Image mask per config mode.
    PatchMask pmask;
    switch (cfg.mask_mode) {
      case MaskMode::none:
        pmask = random_patch_mask(data.grid, 0.0, cfg.seed, mask_stream);
        break;
      case MaskMode::random_mode:
        pmask = random_patch_mask(data.grid, cfg.image_mask_ratio, cfg.seed,
                                  mask_stream);
        break;
      case MaskMode::filter_guided:
        pmask = filter_guided_mask(data.grid, s.response, cfg.image_mask_ratio,
                                   cfg.seed, mask_stream);
        break;
    }
    size_t masked_count = pmask.count();

    TokenMask tmask = text_mask(s.tokens, /*paired_with_image=*/true, cfg.seed,
                                mask_stream);
    if (masked_count == 0 && tmask.positions.empty())
      throw Error(ErrorCode::training,
                  "degenerate batch: no masked tokens and no masked patches");

    std::vector<int> masked_ids = s.tokens.ids;
    std::vector<uint8_t> masked_pos(s.tokens.ids.size(), 0);
    for (size_t p : tmask.positions) {
      masked_ids[p] = Vocabulary::kMask;
      masked_pos[p] = 1;
    }
    txt_keep[k].resize(s.tokens.ids.size());
    for (size_t i = 0; i < s.tokens.ids.size(); ++i)
      txt_keep[k][i] = s.tokens.ids[i] == Vocabulary::kPad ? 0 : 1;

    // Encoder passes: unmasked for ITC/context/ITM, masked for MVLM.
    img_full[k] = encode_image(g, params, s.patches_raw, nullptr);
    txt_full[k] = encode_text(g, params, s.tokens.ids);
    txt_masked[k] = encode_text(g, params, masked_ids);

    // Text reconstruction conditioned on the full image.
    NodeId fused_txt = cross_encode(g, params, /*image_query=*/false,
                                    txt_masked[k], img_full[k], nullptr);
    NodeId logits = decode_text(g, params, fused_txt);
    if (!tmask.positions.empty()) {
      NodeId ce = mvlm_text_loss(g, logits, s.tokens.ids, masked_pos);
      text_ce_sum = text_ce_sum < 0 ? ce : g.add(text_ce_sum, ce);
      ++text_terms;
    }

    // Image reconstruction conditioned on the full text.
    if (masked_count > 0) {
      img_masked[k] = encode_image(g, params, s.patches_raw, &pmask.masked);
      NodeId fused_im = cross_encode(g, params, /*image_query=*/true,
                                     img_masked[k], txt_full[k], &txt_keep[k]);
      NodeId recon = decode_image(g, params, fused_im);
      NodeId l1 = mvlm_image_loss(g, recon, s.patches_target, pmask.masked);
      image_l1_sum = image_l1_sum < 0 ? l1 : g.add(image_l1_sum, l1);
      ++image_terms;
      omega_total += masked_count * data.grid.patch_dim();
      const Tensor& rv = g.val(recon);
      for (size_t p = 0; p < pmask.masked.size(); ++p) {
        if (!pmask.masked[p]) continue;
        for (size_t c = 0; c < rv.cols; ++c) {
          double d = std::abs(s.patches_target.at(p, c) - rv.at(p, c));
          sg->min_masked_residual = std::min(sg->min_masked_residual, d);
        }
      }
    }

    proj_rows_im.push_back(linear(g, g.rows(img_full[k], 0, 1), params.proj_image));
    proj_rows_txt.push_back(linear(g, g.rows(txt_full[k], 0, 1), params.proj_text));
  }

  NodeId mvlm_text_node =
      text_terms > 0 ? g.scale(text_ce_sum, 1.0 / static_cast<double>(n))
                     : g.input(Tensor::scalar(0.0));
  NodeId mvlm_image_node =
      image_terms > 0 ? g.scale(image_l1_sum, 1.0 / static_cast<double>(n))
                      : g.input(Tensor::scalar(0.0));

  // ITC over the stacked, L2-normalized class/start projections.
  NodeId z_im = g.l2_normalize_rows(g.concat_rows(proj_rows_im));
  NodeId z_txt = g.l2_normalize_rows(g.concat_rows(proj_rows_txt));
  NodeId inv_tau = g.exp(g.scale(g.param(params.log_tau), -1.0));
  NodeId itc_node = itc_loss(g, z_im, z_txt, inv_tau);

  // ITM on unmasked cross features: one positive and one uniformly drawn
  // in-batch negative text per sample.
  NodeId itm_node;
  bool itm_skipped = false;
  if (n >= 2) {
    std::vector<size_t> neg = negative_pairing(n, cfg.seed, step);
    std::vector<NodeId> rows_h;
    std::vector<int> labels;
    rows_h.reserve(2 * n);
    for (size_t k = 0; k < n; ++k) {
      auto fuse_pair = [&](size_t text_j) {
        NodeId fi = cross_encode(g, params, true, img_full[k], txt_full[text_j],
                                 &txt_keep[text_j]);
        NodeId ft = cross_encode(g, params, false, txt_full[text_j], img_full[k],
                                 nullptr);
        return g.mul(g.rows(fi, 0, 1), g.rows(ft, 0, 1));
      };
      rows_h.push_back(fuse_pair(k));
      labels.push_back(1);
      rows_h.push_back(fuse_pair(neg[k]));
      labels.push_back(0);
    }
    NodeId itm_logits = linear(g, g.concat_rows(rows_h), params.itm_head);
    itm_node = itm_loss(g, itm_logits, labels);
  } else {
    itm_node = g.input(Tensor::scalar(0.0));
    itm_skipped = true;
  }

  sg->loss = g.add(g.add(mvlm_text_node, mvlm_image_node),
                   g.add(itc_node, itm_node));
  sg->report = total_loss(g.val(mvlm_text_node).data[0],
                          g.val(mvlm_image_node).data[0],
                          g.val(itc_node).data[0], g.val(itm_node).data[0],
                          params.tau(), omega_total, itm_skipped);
  sg->report.total = g.val(sg->loss).data[0];
  return sg;
}

PretrainResult pretrain(const RunConfig& cfg, const std::string& resume_path) {
  cfg.validate();
  Dataset data = load_dataset(cfg.data_dir, cfg, nullptr);

  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + cfg.out_dir);

  ModelParams params;
  params.cfg.image_size = cfg.image_size;
  params.cfg.patch_size = cfg.patch_size;
  params.cfg.dim = cfg.dim;
  params.cfg.proj_dim = cfg.proj_dim;
  params.cfg.blocks = cfg.blocks;
  params.cfg.cross_blocks = cfg.cross_blocks;
  params.cfg.heads = cfg.heads;
  params.cfg.vocab_size = data.vocab.size();
  params.cfg.max_len = cfg.max_len;
  params.init(cfg.seed);

  AdamW opt;
  opt.weight_decay = cfg.weight_decay;

  PretrainResult result;
  uint64_t start_step = 0;
  if (!resume_path.empty()) {
    start_step = load_checkpoint(resume_path, params, opt, cfg.hash());
    if (start_step >= cfg.steps)
      throw Error(ErrorCode::usage, "checkpoint already at or past configured steps");
  }
  result.first_step = start_step;

  data.vocab.save((fs::path(cfg.out_dir) / "vocab.tsv").string());
  std::ofstream log((fs::path(cfg.out_dir) / "log.jsonl").string(),
                    start_step == 0 ? std::ios::trunc : std::ios::app);
  if (!log) throw Error(ErrorCode::io, "cannot write log.jsonl");

  for (uint64_t step = start_step; step < cfg.steps; ++step) {
    std::vector<size_t> batch =
        batch_indices(cfg.seed, data.samples.size(), cfg.batch_size, step);
    auto sg = build_step(params, data, cfg, batch, step);
    if (!std::isfinite(sg->report.total)) {
      save_checkpoint((fs::path(cfg.out_dir) / "checkpoint_lastgood.bin").string(),
                      params, opt, cfg.hash(), step);
      throw Error(ErrorCode::training,
                  "non-finite loss at step " + std::to_string(step) +
                      "; last good state saved to checkpoint_lastgood.bin");
    }
    sg->graph.backward(sg->loss);
    opt.step(params, cfg.lr_at(step));
    params.zero_grad();
    log << loss_report_json(step, sg->report) << '\n';
    result.reports.push_back(sg->report);
    if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 &&
        step + 1 < cfg.steps) {
      save_checkpoint((fs::path(cfg.out_dir) /
                       ("checkpoint_step" + std::to_string(step + 1) + ".bin"))
                          .string(),
                      params, opt, cfg.hash(), step + 1);
    }
  }
  log.flush();
  if (!log) throw Error(ErrorCode::io, "short write to log.jsonl");
  save_checkpoint((fs::path(cfg.out_dir) / "checkpoint.bin").string(), params,
                  opt, cfg.hash(), cfg.steps);
  return result;
}

}  // namespace mmpt
