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

#include <memory>
#include <string>
#include <vector>

#include "mmpt/config.hpp"
#include "mmpt/image.hpp"
#include "mmpt/masking.hpp"
#include "mmpt/model.hpp"
#include "mmpt/objectives.hpp"
#include "mmpt/ridge.hpp"
#include "mmpt/synth.hpp"
#include "mmpt/text.hpp"

namespace mmpt {

// One preprocessed pair: image, its multi-scale response (mask weights and
// filtered reconstruction target), flattened patches, formatted report
// text and its encoding.
struct Sample {
  Study study;
  GrayImage image;
  ResponseMap response;
  Tensor patches_raw;     // [P, patch_dim]
  Tensor patches_target;  // reconstruction target per recon_target
  std::string text;
  TokenSequence tokens;
};

struct Dataset {
  std::vector<Sample> samples;
  Vocabulary vocab;
  PatchGrid grid;
};

// Loads <dir>/studies.jsonl plus <dir>/images/<study_id>.{pgm,png}. When
// vocab_in is null the vocabulary is built from this dataset's formatted
// texts; otherwise texts are encoded against the given one.
Dataset load_dataset(const std::string& dir, const RunConfig& cfg,
                     const Vocabulary* vocab_in);

// Deterministic epoch-shuffled batch: positions [step*B, (step+1)*B) of
// the concatenated per-epoch permutations.
std::vector<size_t> batch_indices(uint64_t seed, size_t dataset_size,
                                  size_t batch_size, uint64_t step);

// Forward trace of one training step; pure function of
// (params, data, config, step).
struct StepGraph {
  Graph graph;
  NodeId loss = -1;
  LossReport report;
  // Smallest |target - recon| over masked pixels, for L1 tie detection in
  // finite-difference checks.
  double min_masked_residual = 1e300;
};

std::unique_ptr<StepGraph> build_step(ModelParams& params, const Dataset& data,
                                      const RunConfig& cfg,
                                      const std::vector<size_t>& batch,
                                      uint64_t step);

struct PretrainResult {
  std::vector<LossReport> reports;  // one per executed step
  uint64_t first_step = 0;          // resume offset
};

// Runs the training loop, writing <out_dir>/vocab.tsv, log.jsonl,
// checkpoint.bin and (with checkpoint_every > 0) checkpoint_step<N>.bin.
// resume_path continues from a saved checkpoint under the same config.
// On a non-finite loss the last good state is saved to
// checkpoint_lastgood.bin and Error(training) is thrown.
PretrainResult pretrain(const RunConfig& cfg, const std::string& resume_path = "");

}  // namespace mmpt
