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
#include <unordered_map>
#include <vector>

namespace mmpt {

// Word-level vocabulary with fixed reserved ids.
class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kStart = 1;
  static constexpr int kMask = 2;
  static constexpr int kUnk = 3;
  static constexpr int kNumReserved = 4;

  Vocabulary() = default;

  int id_of(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
  }
  const std::string& token_of(int id) const;
  size_t size() const { return kNumReserved + id_to_token_.size(); }
  bool contains(const std::string& token) const {
    return token_to_id_.count(token) != 0;
  }

  void save(const std::string& path) const;
  static Vocabulary load(const std::string& path);

  friend Vocabulary build_vocab(const std::vector<std::string>& corpus,
                                size_t min_count);

 private:
  void insert(const std::string& token, int id);
  std::unordered_map<std::string, int> token_to_id_;
  std::vector<std::string> id_to_token_;  // non-reserved, index = id - 4
};

// Encoded text: START + word ids, PAD suffix; maskable marks positions
// holding non-reserved tokens.
struct TokenSequence {
  std::vector<int> ids;
  std::vector<uint8_t> maskable;
};

// Lowercased words, split on anything that is not a letter or digit.
std::vector<std::string> tokenize(const std::string& text);

// Tokens with count >= min_count, ids assigned by (count desc, token asc).
Vocabulary build_vocab(const std::vector<std::string>& corpus, size_t min_count);

TokenSequence encode(const std::string& text, const Vocabulary& vocab,
                     size_t max_len);

// Inverse of encode on UNK-free input: tokens joined by single spaces,
// reserved positions skipped.
std::string decode(const std::vector<int>& ids, const Vocabulary& vocab);

}  // namespace mmpt
