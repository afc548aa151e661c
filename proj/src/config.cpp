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

#include "mmpt/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mmpt/error.hpp"
#include "mmpt/rng.hpp"

namespace mmpt {

MaskMode mask_mode_from_name(const std::string& name) {
  if (name == "none") return MaskMode::none;
  if (name == "random") return MaskMode::random_mode;
  if (name == "filter_guided") return MaskMode::filter_guided;
  throw Error(ErrorCode::config, "unknown mask_mode: " + name);
}

const char* mask_mode_name(MaskMode m) {
  switch (m) {
    case MaskMode::none: return "none";
    case MaskMode::random_mode: return "random";
    case MaskMode::filter_guided: return "filter_guided";
  }
  return "?";
}

ReconTarget recon_target_from_name(const std::string& name) {
  if (name == "raw") return ReconTarget::raw;
  if (name == "filtered") return ReconTarget::filtered;
  throw Error(ErrorCode::config, "unknown recon_target: " + name);
}

const char* recon_target_name(ReconTarget t) {
  return t == ReconTarget::raw ? "raw" : "filtered";
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

size_t parse_size(const std::string& v, const std::string& key) {
  try {
    long long n = std::stoll(v);
    if (n < 0) throw std::out_of_range("negative");
    return static_cast<size_t>(n);
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, "bad integer for " + key + ": " + v);
  }
}

double parse_double(const std::string& v, const std::string& key) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw Error(ErrorCode::config, "bad number for " + key + ": " + v);
  }
}

std::vector<double> parse_scales(const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_double(item, "scales"));
  return out;
}

}  // namespace

void RunConfig::set(const std::string& key, const std::string& value) {
  if (key == "image_size") image_size = parse_size(value, key);
  else if (key == "patch_size") patch_size = parse_size(value, key);
  else if (key == "scales") scales = parse_scales(value);
  else if (key == "mask_mode") mask_mode = mask_mode_from_name(value);
  else if (key == "recon_target") recon_target = recon_target_from_name(value);
  else if (key == "image_mask_ratio") image_mask_ratio = parse_double(value, key);
  else if (key == "report_format") report_format = report_format_from_name(value);
  else if (key == "max_len") max_len = parse_size(value, key);
  else if (key == "min_count") min_count = parse_size(value, key);
  else if (key == "dim") dim = parse_size(value, key);
  else if (key == "proj_dim") proj_dim = parse_size(value, key);
  else if (key == "blocks") blocks = parse_size(value, key);
  else if (key == "cross_blocks") cross_blocks = parse_size(value, key);
  else if (key == "heads") heads = parse_size(value, key);
  else if (key == "batch_size") batch_size = parse_size(value, key);
  else if (key == "steps") steps = parse_size(value, key);
  else if (key == "lr_peak") lr_peak = parse_double(value, key);
  else if (key == "lr_final") lr_final = parse_double(value, key);
  else if (key == "warmup_frac") warmup_frac = parse_double(value, key);
  else if (key == "weight_decay") weight_decay = parse_double(value, key);
  else if (key == "seed") seed = parse_size(value, key);
  else if (key == "checkpoint_every") checkpoint_every = parse_size(value, key);
  else if (key == "data_dir") data_dir = value;
  else if (key == "out_dir") out_dir = value;
  else throw Error(ErrorCode::config, "unknown config key: " + key);
}

void RunConfig::validate() const {
  if (image_size == 0 || patch_size == 0 || image_size % patch_size != 0)
    throw Error(ErrorCode::config, "patch_size must tile image_size");
  if (scales.empty())
    throw Error(ErrorCode::config, "scales must not be empty");
  for (double s : scales)
    if (!(s > 0.0)) throw Error(ErrorCode::config, "scales must be positive");
  if (!(image_mask_ratio >= 0.0 && image_mask_ratio <= 1.0))
    throw Error(ErrorCode::config, "image_mask_ratio must be in [0,1]");
  if (max_len < 2) throw Error(ErrorCode::config, "max_len must be >= 2");
  if (dim == 0 || heads == 0 || dim % heads != 0)
    throw Error(ErrorCode::config, "heads must divide dim");
  if (proj_dim == 0 || blocks == 0 || cross_blocks == 0)
    throw Error(ErrorCode::config, "model dims must be positive");
  if (batch_size == 0 || steps == 0)
    throw Error(ErrorCode::config, "batch_size and steps must be positive");
  if (!(lr_peak > 0.0) || !(lr_final >= 0.0))
    throw Error(ErrorCode::config, "learning rates must be positive");
  if (!(warmup_frac >= 0.0 && warmup_frac <= 1.0))
    throw Error(ErrorCode::config, "warmup_frac must be in [0,1]");
  if (!(weight_decay >= 0.0))
    throw Error(ErrorCode::config, "weight_decay must be nonnegative");
}

std::string RunConfig::canonical() const {
  std::string s;
  s += "image_size=" + std::to_string(image_size) + "\n";
  s += "patch_size=" + std::to_string(patch_size) + "\n";
  s += "scales=";
  for (size_t i = 0; i < scales.size(); ++i)
    s += (i ? "," : "") + fmt_double(scales[i]);
  s += "\n";
  s += "mask_mode=" + std::string(mask_mode_name(mask_mode)) + "\n";
  s += "recon_target=" + std::string(recon_target_name(recon_target)) + "\n";
  s += "image_mask_ratio=" + fmt_double(image_mask_ratio) + "\n";
  s += "report_format=" + std::string(report_format_name(report_format)) + "\n";
  s += "max_len=" + std::to_string(max_len) + "\n";
  s += "min_count=" + std::to_string(min_count) + "\n";
  s += "dim=" + std::to_string(dim) + "\n";
  s += "proj_dim=" + std::to_string(proj_dim) + "\n";
  s += "blocks=" + std::to_string(blocks) + "\n";
  s += "cross_blocks=" + std::to_string(cross_blocks) + "\n";
  s += "heads=" + std::to_string(heads) + "\n";
  s += "batch_size=" + std::to_string(batch_size) + "\n";
  s += "steps=" + std::to_string(steps) + "\n";
  s += "lr_peak=" + fmt_double(lr_peak) + "\n";
  s += "lr_final=" + fmt_double(lr_final) + "\n";
  s += "warmup_frac=" + fmt_double(warmup_frac) + "\n";
  s += "weight_decay=" + fmt_double(weight_decay) + "\n";
  s += "seed=" + std::to_string(seed) + "\n";
  s += "checkpoint_every=" + std::to_string(checkpoint_every) + "\n";
  return s;
}

uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

double RunConfig::lr_at(size_t step) const {
  size_t warmup = static_cast<size_t>(
      std::floor(warmup_frac * static_cast<double>(steps) + 0.5));
  if (warmup > 0 && step < warmup)
    return lr_peak * static_cast<double>(step + 1) / static_cast<double>(warmup);
  size_t span = steps > warmup + 1 ? steps - 1 - warmup : 1;
  double t = static_cast<double>(step - warmup) / static_cast<double>(span);
  t = std::min(t, 1.0);
  return lr_final + 0.5 * (lr_peak - lr_final) * (1.0 + std::cos(M_PI * t));
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, "cannot open config " + path);
  RunConfig cfg;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    size_t hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line.resize(hash_pos);
    size_t a = line.find_first_not_of(" \t\r");
    if (a == std::string::npos) continue;
    size_t b = line.find_last_not_of(" \t\r");
    line = line.substr(a, b - a + 1);
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config,
                  path + ":" + std::to_string(lineno) + ": expected key=value");
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
    size_t v0 = value.find_first_not_of(" \t");
    value = v0 == std::string::npos ? "" : value.substr(v0);
    cfg.set(key, value);
  }
  return cfg;
}

void apply_overrides(RunConfig& cfg, const std::vector<std::string>& sets) {
  for (const auto& kv : sets) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::config, "--set expects key=value, got " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
}

}  // namespace mmpt
