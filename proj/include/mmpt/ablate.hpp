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

#include <string>
#include <vector>

#include "mmpt/config.hpp"

namespace mmpt {

// Controlled A/B harness. axis "masking" varies mask_mode over
// {none, random, filter_guided}; axis "report" varies report_format over
// {passthrough, triplet_string, manuscript}. Everything else, including
// seeds and data, is shared across arms.
struct AblationRow {
  std::string axis;
  std::string arm;
  uint64_t seed = 0;
  double final_loss = 0.0;  // mean total over the last 20 steps
  double i2t_recall = 0.0;
  double t2i_recall = 0.0;
};

std::vector<std::string> ablation_arms(const std::string& axis);

std::vector<AblationRow> ablate(const RunConfig& base, const std::string& axis,
                                const std::vector<uint64_t>& seeds,
                                const std::string& eval_dir, size_t k,
                                const std::vector<std::string>* arms_override = nullptr);

// CSV with header axis,arm,seed,final_loss,i2t_recall,t2i_recall.
std::string ablation_csv(const std::vector<AblationRow>& rows);

double median_recall_i2t(const std::vector<AblationRow>& rows,
                         const std::string& arm);

}  // namespace mmpt
