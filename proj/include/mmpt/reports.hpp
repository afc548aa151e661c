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

namespace mmpt {

enum class Exist { present, absent, uncertain };
enum class Answer { yes, no, uncertain };

// Normalized report atom: lowercased finding, lowercased location (or
// "unspecified"), and its exist status.
struct Triplet {
  std::string entity;
  std::string position = "unspecified";
  Exist exist = Exist::present;

  bool operator==(const Triplet&) const = default;
};

struct Observation {
  std::string question;
  Answer answer = Answer::no;
  bool operator==(const Observation&) const = default;
};

// Canonical binary-observation report: observations sorted by
// (entity, position), duplicates collapsed (yes > uncertain > no), plus a
// study-level verdict that is abnormal iff any answer is yes.
struct Manuscript {
  std::vector<Observation> observations;
  std::string verdict_text;
  bool abnormal = false;
  std::string full_text;

  bool operator==(const Manuscript&) const = default;
};

struct ObservationLabels {
  std::vector<int> labels;           // 1 for yes, 0 otherwise
  std::vector<uint8_t> uncertain;    // 1 where the answer was uncertain
  int verdict_label = 0;             // 1 = abnormal
};

struct Study {
  std::string study_id;
  std::vector<Triplet> triplets;
  std::string report;  // free-form original text; may be empty
};

const char* exist_name(Exist e);
const char* answer_name(Answer a);

// One JSONL line: {"study_id": ..., "triplets": [{"entity","position",
// "exist"}...], "report": optional}. Malformed JSON raises a parse error
// carrying the byte offset; unknown exist values a validation error.
Study parse_triplets(const std::string& line);
std::string serialize_study(const Study& study);

Manuscript generate_manuscript(const std::vector<Triplet>& triplets);
ObservationLabels observation_labels(const Manuscript& m);

enum class ReportFormat { manuscript, triplet_string, passthrough };

ReportFormat report_format_from_name(const std::string& name);
const char* report_format_name(ReportFormat f);

// The text a study contributes under the chosen format: the canonical
// manuscript, a flat "entity position exist." concatenation, or the
// original report text verbatim.
std::string format_report(const Study& study, ReportFormat format);

}  // namespace mmpt
