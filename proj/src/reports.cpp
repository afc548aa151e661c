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

#include "mmpt/reports.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include <json.hpp>

#include "mmpt/error.hpp"

namespace mmpt {

namespace {

using nlohmann::json;

std::string normalize(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

Exist parse_exist(const std::string& raw) {
  std::string v = normalize(raw);
  if (v == "present") return Exist::present;
  if (v == "absent") return Exist::absent;
  if (v == "uncertain") return Exist::uncertain;
  throw Error(ErrorCode::validation, "unknown exist value: \"" + raw + "\"");
}

Answer answer_for(Exist e) {
  switch (e) {
    case Exist::present: return Answer::yes;
    case Exist::absent: return Answer::no;
    case Exist::uncertain: return Answer::uncertain;
  }
  return Answer::no;
}

// yes > uncertain > no.
int answer_rank(Answer a) {
  switch (a) {
    case Answer::yes: return 2;
    case Answer::uncertain: return 1;
    case Answer::no: return 0;
  }
  return 0;
}

}  // namespace

const char* exist_name(Exist e) {
  switch (e) {
    case Exist::present: return "present";
    case Exist::absent: return "absent";
    case Exist::uncertain: return "uncertain";
  }
  return "?";
}

const char* answer_name(Answer a) {
  switch (a) {
    case Answer::yes: return "yes";
    case Answer::no: return "no";
    case Answer::uncertain: return "uncertain";
  }
  return "?";
}

Study parse_triplets(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::parse,
                "malformed JSON at byte " + std::to_string(e.byte) + ": " +
                    e.what());
  }
  if (!j.is_object() || !j.contains("study_id") || !j["study_id"].is_string())
    throw Error(ErrorCode::validation, "expected object with string study_id");
  if (!j.contains("triplets") || !j["triplets"].is_array())
    throw Error(ErrorCode::validation, "expected triplets array");
  Study s;
  s.study_id = j["study_id"].get<std::string>();
  for (const auto& t : j["triplets"]) {
    if (!t.is_object() || !t.contains("entity") || !t.contains("exist"))
      throw Error(ErrorCode::validation, "triplet needs entity and exist");
    Triplet trip;
    trip.entity = normalize(t["entity"].get<std::string>());
    if (trip.entity.empty())
      throw Error(ErrorCode::validation, "triplet entity is empty");
    if (t.contains("position") && t["position"].is_string())
      trip.position = normalize(t["position"].get<std::string>());
    if (trip.position.empty()) trip.position = "unspecified";
    trip.exist = parse_exist(t["exist"].get<std::string>());
    s.triplets.push_back(std::move(trip));
  }
  if (j.contains("report") && j["report"].is_string())
    s.report = j["report"].get<std::string>();
  return s;
}

std::string serialize_study(const Study& study) {
  json j;
  j["study_id"] = study.study_id;
  j["triplets"] = json::array();
  for (const auto& t : study.triplets) {
    j["triplets"].push_back({{"entity", t.entity},
                             {"position", t.position},
                             {"exist", exist_name(t.exist)}});
  }
  if (!study.report.empty()) j["report"] = study.report;
  return j.dump();
}

Manuscript generate_manuscript(const std::vector<Triplet>& triplets) {
  // Collapse duplicates by (entity, position), keeping the most positive
  // answer; the map gives the canonical ordering for free.
  std::map<std::pair<std::string, std::string>, Answer> collapsed;
  for (const auto& t : triplets) {
    Answer a = answer_for(t.exist);
    auto key = std::make_pair(t.entity, t.position);
    auto it = collapsed.find(key);
    if (it == collapsed.end() || answer_rank(a) > answer_rank(it->second))
      collapsed[key] = a;
  }
  Manuscript m;
  for (const auto& [key, answer] : collapsed) {
    Observation obs;
    if (key.second == "unspecified")
      obs.question = "is " + key.first + " present?";
    else
      obs.question = "is " + key.first + " present in the " + key.second + "?";
    obs.answer = answer;
    m.abnormal = m.abnormal || answer == Answer::yes;
    m.observations.push_back(std::move(obs));
  }
  m.verdict_text =
      m.abnormal ? "verdict: abnormal study." : "verdict: no abnormal findings.";
  for (const auto& obs : m.observations) {
    m.full_text += obs.question;
    m.full_text += ' ';
    m.full_text += answer_name(obs.answer);
    m.full_text += ". ";
  }
  m.full_text += m.verdict_text;
  return m;
}

ObservationLabels observation_labels(const Manuscript& m) {
  ObservationLabels out;
  out.labels.reserve(m.observations.size());
  out.uncertain.reserve(m.observations.size());
  for (const auto& obs : m.observations) {
    out.labels.push_back(obs.answer == Answer::yes ? 1 : 0);
    out.uncertain.push_back(obs.answer == Answer::uncertain ? 1 : 0);
  }
  out.verdict_label = m.abnormal ? 1 : 0;
  return out;
}

ReportFormat report_format_from_name(const std::string& name) {
  if (name == "manuscript") return ReportFormat::manuscript;
  if (name == "triplet_string") return ReportFormat::triplet_string;
  if (name == "passthrough") return ReportFormat::passthrough;
  throw Error(ErrorCode::config, "unknown report format: " + name);
}

const char* report_format_name(ReportFormat f) {
  switch (f) {
    case ReportFormat::manuscript: return "manuscript";
    case ReportFormat::triplet_string: return "triplet_string";
    case ReportFormat::passthrough: return "passthrough";
  }
  return "?";
}

std::string format_report(const Study& study, ReportFormat format) {
  switch (format) {
    case ReportFormat::manuscript:
      return generate_manuscript(study.triplets).full_text;
    case ReportFormat::triplet_string: {
      std::string out;
      for (const auto& t : study.triplets) {
        out += t.entity;
        out += ' ';
        out += t.position;
        out += ' ';
        out += exist_name(t.exist);
        out += ". ";
      }
      if (!out.empty()) out.pop_back();
      return out;
    }
    case ReportFormat::passthrough:
      if (study.report.empty())
        throw Error(ErrorCode::validation,
                    "study " + study.study_id + " has no original report text");
      return study.report;
  }
  return "";
}

}  // namespace mmpt
