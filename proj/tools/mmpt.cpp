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

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mmpt/ablate.hpp"
#include "mmpt/checkpoint.hpp"
#include "mmpt/config.hpp"
#include "mmpt/error.hpp"
#include "mmpt/evalretr.hpp"
#include "mmpt/kernels.hpp"
#include "mmpt/masking.hpp"
#include "mmpt/reports.hpp"
#include "mmpt/ridge.hpp"
#include "mmpt/rng.hpp"
#include "mmpt/synth.hpp"
#include "mmpt/train.hpp"

namespace fs = std::filesystem;

namespace {

std::vector<uint64_t> parse_seed_list(const std::string& s) {
  std::vector<uint64_t> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(std::stoull(item));
  if (out.empty()) throw mmpt::Error(mmpt::ErrorCode::config, "empty seed list");
  return out;
}

// original | masked | response, horizontally.
mmpt::GrayImage side_by_side(const mmpt::GrayImage& a, const mmpt::GrayImage& b,
                             const mmpt::GrayImage& c) {
  mmpt::GrayImage out(a.height, a.width * 3);
  for (size_t r = 0; r < a.height; ++r)
    for (size_t col = 0; col < a.width; ++col) {
      out.at(r, col) = a.at(r, col);
      out.at(r, a.width + col) = b.at(r, col);
      out.at(r, 2 * a.width + col) = c.at(r, col);
    }
  return out;
}

void write_image_by_ext(const mmpt::GrayImage& img, const std::string& path) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".png")
    mmpt::write_png(img, path);
  else
    mmpt::write_pgm(img, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"masked multimodal pre-training sandbox"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::vector<std::string> overrides;
  std::string kernel_backend = "auto";
  app.add_option("--config", config_path, "key=value config file");
  app.add_option("--set", overrides, "config override key=value (repeatable)")
      ->expected(-1)
      ->allow_extra_args(false);
  app.add_option("--kernels", kernel_backend, "kernel backend: auto|scalar|avx2|neon");

  // filter
  auto* cmd_filter = app.add_subcommand("filter", "ridge-filter an image")->fallthrough();
  std::string filter_input, filter_out_image, filter_out_raw, filter_scales;
  cmd_filter->add_option("-i,--input", filter_input, "8-bit gray PNG/PGM")->required();
  cmd_filter->add_option("--scales", filter_scales, "comma-separated sigmas (default from config)");
  cmd_filter->add_option("--output-image", filter_out_image, "8-bit visualization (max-rescaled)");
  cmd_filter->add_option("--output-raw", filter_out_raw, "raw f64 dump with dimension header");

  // mask
  auto* cmd_mask = app.add_subcommand("mask", "visualize masking: original|masked|response")->fallthrough();
  std::string mask_input, mask_output, mask_mode_name_s = "filter_guided";
  double mask_ratio = -1.0;
  uint64_t mask_seed_opt = 0;
  bool mask_seed_given = false;
  cmd_mask->add_option("-i,--input", mask_input)->required();
  cmd_mask->add_option("-o,--output", mask_output, "side-by-side PNG")->required();
  cmd_mask->add_option("--mode", mask_mode_name_s, "random|filter_guided");
  cmd_mask->add_option("--mask-ratio", mask_ratio, "override config image_mask_ratio");
  cmd_mask->add_option("--seed", mask_seed_opt)->each([&](const std::string&) {
    mask_seed_given = true;
  });

  // manuscript
  auto* cmd_ms = app.add_subcommand("manuscript", "triplet JSONL -> report JSONL")->fallthrough();
  std::string ms_input = "-", ms_output = "-", ms_format = "manuscript";
  cmd_ms->add_option("-i,--input", ms_input, "JSONL path or - for stdin");
  cmd_ms->add_option("-o,--output", ms_output, "JSONL path or - for stdout");
  cmd_ms->add_option("--format", ms_format, "manuscript|triplet_string|passthrough");

  // synth
  auto* cmd_synth = app.add_subcommand("synth", "generate a synthetic paired dataset")->fallthrough();
  size_t synth_count = 0;
  uint64_t synth_seed = 0;
  bool synth_seed_given = false;
  std::string synth_out;
  cmd_synth->add_option("-n,--count", synth_count, "number of studies")->required();
  cmd_synth->add_option("-o,--out", synth_out, "output directory")->required();
  cmd_synth->add_option("--seed", synth_seed)->each([&](const std::string&) {
    synth_seed_given = true;
  });

  // pretrain
  auto* cmd_train = app.add_subcommand("pretrain", "run the training loop")->fallthrough();
  std::string resume_path;
  cmd_train->add_option("--resume", resume_path, "checkpoint to continue from");

  // eval
  auto* cmd_eval = app.add_subcommand("eval", "retrieval recall@k on held-out pairs")->fallthrough();
  std::string eval_ckpt, eval_dir, eval_vocab;
  size_t eval_k = 1;
  cmd_eval->add_option("--checkpoint", eval_ckpt)->required();
  cmd_eval->add_option("--data", eval_dir, "held-out dataset directory")->required();
  cmd_eval->add_option("--vocab", eval_vocab, "vocab.tsv (default: next to checkpoint)");
  cmd_eval->add_option("-k", eval_k, "recall cutoff");

  // ablate
  auto* cmd_ablate = app.add_subcommand("ablate", "A/B comparison along one axis")->fallthrough();
  std::string ablate_axis, ablate_eval_dir, ablate_seeds = "", ablate_csv_path;
  size_t ablate_k = 1;
  cmd_ablate->add_option("--axis", ablate_axis, "masking|report")->required();
  cmd_ablate->add_option("--eval-data", ablate_eval_dir)->required();
  cmd_ablate->add_option("--seeds", ablate_seeds, "comma-separated (default: config seed)");
  cmd_ablate->add_option("-k", ablate_k, "recall cutoff");
  cmd_ablate->add_option("--csv", ablate_csv_path, "also write the table here");

  CLI11_PARSE(app, argc, argv);

  try {
    mmpt::kernels::set_backend(kernel_backend);
    mmpt::RunConfig cfg;
    if (!config_path.empty()) cfg = mmpt::parse_config_file(config_path);
    mmpt::apply_overrides(cfg, overrides);
    cfg.validate();

    if (cmd_filter->parsed()) {
      std::vector<double> scales = cfg.scales;
      if (!filter_scales.empty()) {
        scales.clear();
        std::stringstream ss(filter_scales);
        std::string item;
        while (std::getline(ss, item, ','))
          if (!item.empty()) scales.push_back(std::stod(item));
      }
      mmpt::GrayImage img = mmpt::load_image(filter_input, cfg.image_size);
      mmpt::ResponseMap map = mmpt::multiscale_response(img, scales);
      if (!filter_out_image.empty())
        write_image_by_ext(mmpt::response_to_image(map), filter_out_image);
      if (!filter_out_raw.empty()) mmpt::write_response_raw(map, filter_out_raw);
      if (filter_out_image.empty() && filter_out_raw.empty())
        throw mmpt::Error(mmpt::ErrorCode::usage,
                          "filter: give --output-image and/or --output-raw");
      return 0;
    }

    if (cmd_mask->parsed()) {
      double ratio = mask_ratio >= 0.0 ? mask_ratio : cfg.image_mask_ratio;
      uint64_t seed = mask_seed_given ? mask_seed_opt : cfg.seed;
      mmpt::GrayImage img = mmpt::load_image(mask_input, cfg.image_size);
      mmpt::ResponseMap map = mmpt::multiscale_response(img, cfg.scales);
      mmpt::PatchGrid grid;
      mmpt::patchify(img, cfg.patch_size, &grid);
      mmpt::PatchMask pm =
          mask_mode_name_s == "random"
              ? mmpt::random_patch_mask(grid, ratio, seed)
              : mmpt::filter_guided_mask(grid, map, ratio, seed);
      mmpt::GrayImage masked = mmpt::apply_image_mask(img, pm);
      write_image_by_ext(side_by_side(img, masked, mmpt::response_to_image(map)),
                         mask_output);
      return 0;
    }

    if (cmd_ms->parsed()) {
      std::ifstream fin;
      std::ofstream fout;
      if (ms_input != "-") {
        fin.open(ms_input);
        if (!fin) throw mmpt::Error(mmpt::ErrorCode::io, "cannot open " + ms_input);
      }
      if (ms_output != "-") {
        fout.open(ms_output);
        if (!fout) throw mmpt::Error(mmpt::ErrorCode::io, "cannot write " + ms_output);
      }
      std::istream& in = ms_input == "-" ? std::cin : fin;
      std::ostream& out = ms_output == "-" ? std::cout : fout;
      mmpt::ReportFormat fmt = mmpt::report_format_from_name(ms_format);
      std::string line;
      while (std::getline(in, line)) {
        if (line.empty()) continue;
        mmpt::Study study = mmpt::parse_triplets(line);
        mmpt::Manuscript m = mmpt::generate_manuscript(study.triplets);
        mmpt::ObservationLabels labels = mmpt::observation_labels(m);
        nlohmann::ordered_json j;
        j["study_id"] = study.study_id;
        j["full_text"] = mmpt::format_report(study, fmt);
        j["labels"] = labels.labels;
        j["verdict"] = m.abnormal ? "abnormal" : "normal";
        out << j.dump() << '\n';
      }
      return 0;
    }

    if (cmd_synth->parsed()) {
      mmpt::synth_dataset(synth_count, synth_seed_given ? synth_seed : cfg.seed,
                          cfg.image_size, synth_out);
      std::cout << "wrote " << synth_count << " studies to " << synth_out << "\n";
      return 0;
    }

    if (cmd_train->parsed()) {
      mmpt::PretrainResult res = mmpt::pretrain(cfg, resume_path);
      const mmpt::LossReport& last = res.reports.back();
      std::cout << "done: " << cfg.steps << " steps, final total "
                << last.total << ", checkpoint in " << cfg.out_dir << "\n";
      return 0;
    }

    if (cmd_eval->parsed()) {
      if (eval_vocab.empty())
        eval_vocab = (fs::path(eval_ckpt).parent_path() / "vocab.tsv").string();
      mmpt::RetrievalResult r =
          mmpt::eval_retrieval_files(cfg, eval_ckpt, eval_vocab, eval_dir, eval_k);
      std::cout << mmpt::retrieval_json(r) << "\n";
      return 0;
    }

    if (cmd_ablate->parsed()) {
      std::vector<uint64_t> seeds = ablate_seeds.empty()
                                        ? std::vector<uint64_t>{cfg.seed}
                                        : parse_seed_list(ablate_seeds);
      auto rows = mmpt::ablate(cfg, ablate_axis, seeds, ablate_eval_dir, ablate_k);
      std::string csv = mmpt::ablation_csv(rows);
      std::cout << csv;
      if (!ablate_csv_path.empty()) {
        std::ofstream out(ablate_csv_path);
        if (!out) throw mmpt::Error(mmpt::ErrorCode::io, "cannot write " + ablate_csv_path);
        out << csv;
      }
      return 0;
    }
  } catch (const mmpt::Error& e) {
    std::cerr << e.line() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "E_UNKNOWN: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
