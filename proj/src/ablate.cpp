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

#include "mmpt/ablate.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "mmpt/error.hpp"
#include "mmpt/evalretr.hpp"
#include "mmpt/train.hpp"

namespace mmpt {

namespace fs = std::filesystem;

std::vector<std::string> ablation_arms(const std::string& axis) {
  if (axis == "masking") return {"none", "random", "filter_guided"};
  if (axis == "report") return {"passthrough", "triplet_string", "manuscript"};
  throw Error(ErrorCode::config, "unknown ablation axis: " + axis);
}

std::vector<AblationRow> ablate(const RunConfig& base, const std::string& axis,
                                const std::vector<uint64_t>& seeds,
                                const std::string& eval_dir, size_t k,
                                const std::vector<std::string>* arms_override) {
  std::vector<std::string> arms =
      arms_override ? *arms_override : ablation_arms(axis);
  if (seeds.empty()) throw Error(ErrorCode::config, "ablate: no seeds given");

  std::vector<AblationRow> rows;
  for (const auto& arm : arms) {
    for (uint64_t seed : seeds) {
      RunConfig cfg = base;
      cfg.seed = seed;
      if (axis == "masking")
        cfg.mask_mode = mask_mode_from_name(arm);
      else
        cfg.report_format = report_format_from_name(arm);
      cfg.out_dir = (fs::path(base.out_dir) /
                     ("ablate_" + axis + "_" + arm + "_s" + std::to_string(seed)))
                        .string();
      PretrainResult res = pretrain(cfg);

      size_t tail = std::min<size_t>(20, res.reports.size());
      double acc = 0.0;
      for (size_t i = res.reports.size() - tail; i < res.reports.size(); ++i)
        acc += res.reports[i].total;

      RetrievalResult r = eval_retrieval_files(
          cfg, (fs::path(cfg.out_dir) / "checkpoint.bin").string(),
          (fs::path(cfg.out_dir) / "vocab.tsv").string(), eval_dir, k);

      AblationRow row;
      row.axis = axis;
      row.arm = arm;
      row.seed = seed;
      row.final_loss = acc / static_cast<double>(tail);
      row.i2t_recall = r.i2t_recall;
      row.t2i_recall = r.t2i_recall;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string out = "axis,arm,seed,final_loss,i2t_recall,t2i_recall\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%llu,%.6f,%.6f,%.6f\n",
                  r.axis.c_str(), r.arm.c_str(),
                  static_cast<unsigned long long>(r.seed), r.final_loss,
                  r.i2t_recall, r.t2i_recall);
    out += buf;
  }
  return out;
}

double median_recall_i2t(const std::vector<AblationRow>& rows,
                         const std::string& arm) {
  std::vector<double> vals;
  for (const auto& r : rows)
    if (r.arm == arm) vals.push_back(r.i2t_recall);
  if (vals.empty()) throw Error(ErrorCode::usage, "no rows for arm " + arm);
  std::sort(vals.begin(), vals.end());
  size_t n = vals.size();
  return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

}  // namespace mmpt
