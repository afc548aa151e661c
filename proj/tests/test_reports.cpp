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

#include "mmpt/error.hpp"
#include "mmpt/reports.hpp"
#include "mmpt/rng.hpp"

using namespace mmpt;

TEST_CASE("parse normalizes case, whitespace and missing positions") {
  Study s = parse_triplets(
      R"({"study_id":"s1","triplets":[{"entity":"Pneumonia","position":" Left Lung ","exist":"present"}]})");
  CHECK(s.study_id == "s1");
  REQUIRE(s.triplets.size() == 1);
  CHECK(s.triplets[0].entity == "pneumonia");
  CHECK(s.triplets[0].position == "left lung");
  CHECK(s.triplets[0].exist == Exist::present);

  Study s2 = parse_triplets(R"({"study_id":"s2","triplets":[]})");
  CHECK(s2.triplets.empty());

  Study s3 = parse_triplets(
      R"({"study_id":"s3","triplets":[{"entity":"edema","exist":"absent"}]})");
  CHECK(s3.triplets[0].position == "unspecified");
}

TEST_CASE("unknown exist value is a validation error naming the value") {
  try {
    parse_triplets(
        R"({"study_id":"s1","triplets":[{"entity":"x","exist":"maybe"}]})");
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::validation);
    CHECK(std::string(e.what()).find("maybe") != std::string::npos);
  }
}

TEST_CASE("malformed JSON is a parse error carrying the byte offset") {
  try {
    parse_triplets(R"({"study_id": "s1", "triplets": [}] })");
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::parse);
    CHECK(std::string(e.what()).find("byte") != std::string::npos);
  }
}

TEST_CASE("empty entity is rejected") {
  CHECK_THROWS_AS(parse_triplets(
                      R"({"study_id":"s1","triplets":[{"entity":"  ","exist":"present"}]})"),
                  Error);
}

TEST_CASE("manuscript for a single present finding") {
  Manuscript m = generate_manuscript({{"pneumonia", "left lung", Exist::present}});
  REQUIRE(m.observations.size() == 1);
  CHECK(m.observations[0].question == "is pneumonia present in the left lung?");
  CHECK(m.observations[0].answer == Answer::yes);
  CHECK(m.abnormal);
  CHECK(m.verdict_text == "verdict: abnormal study.");
  CHECK(m.full_text ==
        "is pneumonia present in the left lung? yes. verdict: abnormal study.");
}

TEST_CASE("empty triplet list is a normal study") {
  Manuscript m = generate_manuscript({});
  CHECK(m.observations.empty());
  CHECK_FALSE(m.abnormal);
  CHECK(m.verdict_text == "verdict: no abnormal findings.");
  CHECK(m.full_text == "verdict: no abnormal findings.");
}

TEST_CASE("unspecified position drops the location clause") {
  Manuscript m = generate_manuscript({{"effusion", "unspecified", Exist::absent}});
  CHECK(m.observations[0].question == "is effusion present?");
  CHECK(m.observations[0].answer == Answer::no);
  CHECK_FALSE(m.abnormal);
}

TEST_CASE("observations are canonically ordered regardless of input order") {
  std::vector<Triplet> triplets = {
      {"effusion", "unspecified", Exist::absent},
      {"edema", "unspecified", Exist::absent},
  };
  Manuscript a = generate_manuscript(triplets);
  std::swap(triplets[0], triplets[1]);
  Manuscript b = generate_manuscript(triplets);
  CHECK(a == b);
  CHECK(a.observations[0].question == "is edema present?");
  CHECK_FALSE(a.abnormal);
}

TEST_CASE("canonicalization is invariant under many random permutations") {
  std::vector<Triplet> base = {
      {"tube", "upper left", Exist::present},
      {"nodule", "lower right", Exist::uncertain},
      {"opacity", "upper right", Exist::absent},
      {"opacity", "lower left", Exist::present},
      {"edema", "unspecified", Exist::absent},
  };
  Manuscript expected = generate_manuscript(base);
  for (uint64_t t = 0; t < 200; ++t) {
    auto perm = rng::permutation(42, t, base.size());
    std::vector<Triplet> shuffled;
    for (size_t i : perm) shuffled.push_back(base[i]);
    CHECK(generate_manuscript(shuffled) == expected);
  }
}

TEST_CASE("duplicates collapse keeping the most positive answer") {
  Manuscript m = generate_manuscript({
      {"opacity", "upper left", Exist::absent},
      {"opacity", "upper left", Exist::uncertain},
      {"opacity", "upper left", Exist::absent},
  });
  REQUIRE(m.observations.size() == 1);
  CHECK(m.observations[0].answer == Answer::uncertain);

  Manuscript m2 = generate_manuscript({
      {"opacity", "upper left", Exist::uncertain},
      {"opacity", "upper left", Exist::present},
  });
  CHECK(m2.observations[0].answer == Answer::yes);
  CHECK(m2.abnormal);
}

TEST_CASE("verdict is abnormal iff some observation answers yes") {
  for (uint64_t t = 0; t < 100; ++t) {
    std::vector<Triplet> triplets;
    size_t n = 1 + rng::below(7, t, 0, 4);
    bool any_present = false;
    for (size_t i = 0; i < n; ++i) {
      Exist e = static_cast<Exist>(rng::below(7, t, i + 1, 3));
      // distinct entity per slot avoids collapse interplay here
      triplets.push_back({"finding" + std::to_string(i), "unspecified", e});
      any_present = any_present || e == Exist::present;
    }
    Manuscript m = generate_manuscript(triplets);
    CHECK(m.abnormal == any_present);
    bool any_yes = false;
    for (const auto& o : m.observations) any_yes = any_yes || o.answer == Answer::yes;
    CHECK(m.abnormal == any_yes);
  }
}

TEST_CASE("observation labels and verdict label") {
  Manuscript m = generate_manuscript({
      {"a", "unspecified", Exist::present},
      {"b", "unspecified", Exist::absent},
  });
  ObservationLabels l = observation_labels(m);
  CHECK(l.labels == std::vector<int>{1, 0});
  CHECK(l.uncertain == std::vector<uint8_t>{0, 0});
  CHECK(l.verdict_label == 1);

  Manuscript mu = generate_manuscript({
      {"a", "unspecified", Exist::uncertain},
      {"b", "unspecified", Exist::uncertain},
  });
  ObservationLabels lu = observation_labels(mu);
  CHECK(lu.labels == std::vector<int>{0, 0});
  CHECK(lu.uncertain == std::vector<uint8_t>{1, 1});
  CHECK(lu.verdict_label == 0);
}

TEST_CASE("serialize then parse reproduces the normalized study") {
  Study s;
  s.study_id = "s42";
  s.triplets = {{"tube", "upper left", Exist::present},
                {"edema", "unspecified", Exist::uncertain}};
  s.report = "some original text.";
  Study back = parse_triplets(serialize_study(s));
  CHECK(back.study_id == s.study_id);
  CHECK(back.triplets == s.triplets);
  CHECK(back.report == s.report);
}

TEST_CASE("report format variants") {
  Study s;
  s.study_id = "s1";
  s.triplets = {{"tube", "upper left", Exist::present},
                {"nodule", "lower right", Exist::absent}};
  s.report = "original words here.";

  CHECK(format_report(s, ReportFormat::manuscript) ==
        generate_manuscript(s.triplets).full_text);
  CHECK(format_report(s, ReportFormat::triplet_string) ==
        "tube upper left present. nodule lower right absent.");
  CHECK(format_report(s, ReportFormat::passthrough) == "original words here.");

  Study no_report = s;
  no_report.report.clear();
  CHECK_THROWS_AS(format_report(no_report, ReportFormat::passthrough), Error);
}
