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
#include <string>
#include <vector>

#include "mmpt/reports.hpp"

namespace mmpt {

enum class MaskMode { none, random_mode, filter_guided };

MaskMode mask_mode_from_name(const std::string& name);
const char* mask_mode_name(MaskMode m);

enum class ReconTarget { raw, filtered };

ReconTarget recon_target_from_name(const std::string& name);
const char* recon_target_name(ReconTarget t);

// Run configuration, parsed from key=value lines ('#' comments) plus
// --set overrides. The canonical serialization covers every semantic
// field (paths excluded) and its FNV-1a hash is embedded in checkpoints.
struct RunConfig {
  // imaging / filter
  size_t image_size = 32;
  size_t patch_size = 8;
  std::vector<double> scales = {1.0, 2.0, 4.0};

  // masking
  MaskMode mask_mode = MaskMode::filter_guided;
  ReconTarget recon_target = ReconTarget::filtered;
  double image_mask_ratio = 0.75;

  // text
  ReportFormat report_format = ReportFormat::manuscript;
  size_t max_len = 64;
  size_t min_count = 1;

  // model
  size_t dim = 64;
  size_t proj_dim = 32;
  size_t blocks = 2;
  size_t cross_blocks = 2;
  size_t heads = 4;

  // training
  size_t batch_size = 16;
  size_t steps = 200;
  double lr_peak = 3e-4;
  double lr_final = 1e-5;
  double warmup_frac = 0.10;
  double weight_decay = 0.05;
  uint64_t seed = 42;
  size_t checkpoint_every = 0;  // 0 = final checkpoint only

  // paths (not hashed)
  std::string data_dir = "data";
  std::string out_dir = "out";

  void set(const std::string& key, const std::string& value);
  void validate() const;
  std::string canonical() const;  // semantic fields, fixed order
  uint64_t hash() const;

  // Linear warmup to lr_peak over the first warmup_frac of steps, then
  // cosine decay to lr_final.
  double lr_at(size_t step) const;
};

RunConfig parse_config_file(const std::string& path);
void apply_overrides(RunConfig& cfg, const std::vector<std::string>& sets);

}  // namespace mmpt
