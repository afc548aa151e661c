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

#include "mmpt/image.hpp"
#include "mmpt/reports.hpp"

namespace mmpt {

// Synthetic paired data: each study renders 0-3 bright structures (tube /
// opacity / nodule) at distinct quadrant positions over a noisy dark
// background, with exactly matching present-triplets plus 0-2 distractor
// absent-findings. The free-form `report` field imitates inconsistent
// author styles (synonyms, shuffled sentences, filler) while triplets stay
// canonical.
struct SynthStudy {
  Study study;
  GrayImage image;
};

SynthStudy synth_study(size_t index, uint64_t seed, size_t image_size);

// Writes <out_dir>/studies.jsonl and <out_dir>/images/<study_id>.pgm.
void synth_dataset(size_t count, uint64_t seed, size_t image_size,
                   const std::string& out_dir);

}  // namespace mmpt
