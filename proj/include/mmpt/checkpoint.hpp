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

#include "mmpt/model.hpp"

namespace mmpt {

// Versioned binary checkpoint: magic + version, config hash, completed
// step count, optimizer step counter, then named little-endian f64 blobs
// (value, Adam m, Adam v per parameter). The loader rejects hash, name or
// shape mismatches.
void save_checkpoint(const std::string& path, const ModelParams& params,
                     const AdamW& opt, uint64_t config_hash, uint64_t step);

// params must already be initialized with the matching architecture.
// Returns the completed step count.
uint64_t load_checkpoint(const std::string& path, ModelParams& params,
                         AdamW& opt, uint64_t expected_config_hash);

}  // namespace mmpt
