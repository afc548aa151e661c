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

#include "mmpt/train.hpp"

namespace mmpt {

struct RetrievalResult {
  size_t pairs = 0;
  size_t k = 0;
  double i2t_recall = 0.0;
  double t2i_recall = 0.0;
  double chance = 0.0;
};

// Ranks held-out pairs by z_im . z_txt of the unmasked encodings.
// Retrieval counts as correct when a top-k candidate carries text equal to
// the query pair's text, which keeps duplicate reports from penalizing an
// exact-equivalent retrieval.
RetrievalResult eval_retrieval(ModelParams& params, const Dataset& eval_data,
                               size_t k);

// Convenience wrapper: loads vocab + checkpoint (hash-checked against cfg)
// and the held-out pairs from eval_dir.
RetrievalResult eval_retrieval_files(const RunConfig& cfg,
                                     const std::string& checkpoint_path,
                                     const std::string& vocab_path,
                                     const std::string& eval_dir, size_t k);

std::string retrieval_json(const RetrievalResult& r);

}  // namespace mmpt
