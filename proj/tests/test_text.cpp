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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "mmpt/error.hpp"
#include "mmpt/text.hpp"

using namespace mmpt;

namespace {
std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}
}  // namespace

TEST_CASE("tokenizer lowercases and splits on punctuation") {
  auto toks = tokenize("Is Pneumonia present, in the left-lung? yes.");
  CHECK(toks == std::vector<std::string>{"is", "pneumonia", "present", "in",
                                         "the", "left", "lung", "yes"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("?!.,").empty());
}

TEST_CASE("build_vocab keeps tokens above min_count") {
  Vocabulary v = build_vocab({"a a b"}, 1);
  CHECK(v.size() == 6);  // 4 reserved + a + b
  CHECK(v.id_of("a") == 4);  // higher count wins the lower id
  CHECK(v.id_of("b") == 5);

  Vocabulary v2 = build_vocab({"a a b"}, 2);
  CHECK(v2.size() == 5);
  CHECK(v2.id_of("a") == 4);
  CHECK(v2.id_of("b") == Vocabulary::kUnk);
}

TEST_CASE("vocab id assignment breaks count ties alphabetically") {
  Vocabulary v = build_vocab({"zeta alpha zeta alpha beta"}, 1);
  CHECK(v.id_of("alpha") == 4);  // count 2, tie with zeta -> alphabetical
  CHECK(v.id_of("zeta") == 5);
  CHECK(v.id_of("beta") == 6);
}

TEST_CASE("empty corpus is a configuration error") {
  CHECK_THROWS_AS(build_vocab({}, 1), Error);
}

TEST_CASE("identical corpora produce byte-identical vocabulary files") {
  namespace fs = std::filesystem;
  auto p1 = (fs::temp_directory_path() / "mmpt_vocab1.tsv").string();
  auto p2 = (fs::temp_directory_path() / "mmpt_vocab2.tsv").string();
  std::vector<std::string> corpus = {"is tube present? yes.",
                                     "verdict: abnormal study."};
  build_vocab(corpus, 1).save(p1);
  build_vocab(corpus, 1).save(p2);
  CHECK(slurp(p1) == slurp(p2));
  CHECK_FALSE(slurp(p1).empty());
}

TEST_CASE("vocabulary save/load round trip") {
  Vocabulary v = build_vocab({"alpha beta gamma alpha"}, 1);
  namespace fs = std::filesystem;
  auto path = (fs::temp_directory_path() / "mmpt_vocab_rt.tsv").string();
  v.save(path);
  Vocabulary back = Vocabulary::load(path);
  CHECK(back.size() == v.size());
  for (const auto& tok : {"alpha", "beta", "gamma"})
    CHECK(back.id_of(tok) == v.id_of(tok));
}

TEST_CASE("encode pads, truncates, and starts with START") {
  Vocabulary v = build_vocab({"alpha beta"}, 1);

  TokenSequence empty = encode("", v, 5);
  CHECK(empty.ids == std::vector<int>{Vocabulary::kStart, 0, 0, 0, 0});
  CHECK(empty.maskable == std::vector<uint8_t>{0, 0, 0, 0, 0});

  TokenSequence longer = encode("alpha beta alpha beta alpha beta", v, 4);
  CHECK(longer.ids.size() == 4);
  CHECK(longer.ids[0] == Vocabulary::kStart);
  for (size_t i = 1; i < 4; ++i) CHECK(longer.ids[i] >= Vocabulary::kNumReserved);

  CHECK_THROWS_AS(encode("alpha", v, 1), Error);
}

TEST_CASE("unknown words map to UNK and are not maskable") {
  Vocabulary v = build_vocab({"alpha"}, 1);
  TokenSequence seq = encode("alpha omega", v, 6);
  CHECK(seq.ids[1] == v.id_of("alpha"));
  CHECK(seq.ids[2] == Vocabulary::kUnk);
  CHECK(seq.maskable[1] == 1);
  CHECK(seq.maskable[2] == 0);
}

TEST_CASE("encode then decode reproduces normalized in-vocab text") {
  Vocabulary v = build_vocab({"is tube present in the upper left yes verdict abnormal study"}, 1);
  std::string text = "Is tube present in the upper left? yes. verdict: abnormal study.";
  TokenSequence seq = encode(text, v, 32);
  std::string normalized;
  for (const auto& t : tokenize(text)) {
    if (!normalized.empty()) normalized += ' ';
    normalized += t;
  }
  CHECK(decode(seq.ids, v) == normalized);
}

TEST_CASE("reserved ids never carry the maskable flag") {
  Vocabulary v = build_vocab({"alpha beta gamma"}, 1);
  TokenSequence seq = encode("alpha beta gamma", v, 10);
  for (size_t i = 0; i < seq.ids.size(); ++i)
    if (seq.ids[i] < Vocabulary::kNumReserved) CHECK(seq.maskable[i] == 0);
}
