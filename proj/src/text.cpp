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

#include "mmpt/text.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>

#include "mmpt/error.hpp"

namespace mmpt {

const std::string& Vocabulary::token_of(int id) const {
  static const std::string kReservedNames[kNumReserved] = {"[pad]", "[start]",
                                                           "[mask]", "[unk]"};
  if (id >= 0 && id < kNumReserved) return kReservedNames[id];
  size_t idx = static_cast<size_t>(id - kNumReserved);
  if (idx >= id_to_token_.size())
    throw Error(ErrorCode::domain, "token id out of range: " + std::to_string(id));
  return id_to_token_[idx];
}

void Vocabulary::insert(const std::string& token, int id) {
  token_to_id_[token] = id;
  if (static_cast<size_t>(id - kNumReserved) >= id_to_token_.size())
    id_to_token_.resize(id - kNumReserved + 1);
  id_to_token_[id - kNumReserved] = token;
}

void Vocabulary::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  std::map<std::string, int> sorted(token_to_id_.begin(), token_to_id_.end());
  for (const auto& [token, id] : sorted) out << token << '\t' << id << '\n';
  if (!out) throw Error(ErrorCode::io, "short write: " + path);
}

Vocabulary Vocabulary::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  Vocabulary v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw Error(ErrorCode::format, "bad vocabulary line: " + line);
    int id = std::stoi(line.substr(tab + 1));
    if (id < kNumReserved)
      throw Error(ErrorCode::format, "reserved id in vocabulary file: " + line);
    v.insert(line.substr(0, tab), id);
  }
  return v;
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    unsigned char c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

Vocabulary build_vocab(const std::vector<std::string>& corpus, size_t min_count) {
  if (corpus.empty())
    throw Error(ErrorCode::config, "vocabulary corpus is empty");
  std::map<std::string, size_t> counts;
  for (const auto& text : corpus)
    for (const auto& tok : tokenize(text)) ++counts[tok];
  std::vector<std::pair<std::string, size_t>> kept;
  for (const auto& [tok, n] : counts)
    if (n >= min_count) kept.emplace_back(tok, n);
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  Vocabulary v;
  int id = Vocabulary::kNumReserved;
  for (const auto& [tok, n] : kept) v.insert(tok, id++);
  return v;
}

TokenSequence encode(const std::string& text, const Vocabulary& vocab,
                     size_t max_len) {
  if (max_len < 2) throw Error(ErrorCode::config, "max_len must be >= 2");
  TokenSequence seq;
  seq.ids.reserve(max_len);
  seq.ids.push_back(Vocabulary::kStart);
  for (const auto& tok : tokenize(text)) {
    if (seq.ids.size() == max_len) break;
    seq.ids.push_back(vocab.id_of(tok));
  }
  while (seq.ids.size() < max_len) seq.ids.push_back(Vocabulary::kPad);
  seq.maskable.resize(max_len);
  for (size_t i = 0; i < max_len; ++i)
    seq.maskable[i] = seq.ids[i] >= Vocabulary::kNumReserved ? 1 : 0;
  return seq;
}

std::string decode(const std::vector<int>& ids, const Vocabulary& vocab) {
  std::string out;
  for (int id : ids) {
    if (id == Vocabulary::kPad || id == Vocabulary::kStart) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.token_of(id);
  }
  return out;
}

}  // namespace mmpt
