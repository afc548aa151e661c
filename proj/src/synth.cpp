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

#include "mmpt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mmpt/error.hpp"
#include "mmpt/rng.hpp"

namespace mmpt {

namespace {

const char* kEntities[3] = {"tube", "opacity", "nodule"};
const char* kPositions[4] = {"upper left", "upper right", "lower left",
                             "lower right"};

// Style pools for the free-form report; the canonical triplet names stay
// out of sync with these on purpose.
const char* kEntitySyn[3][3] = {
    {"tube", "line", "catheter"},
    {"opacity", "haziness", "consolidation"},
    {"nodule", "mass", "round lesion"},
};
const char* kPositionSyn[4][3] = {
    {"upper left", "left upper zone", "superior left region"},
    {"upper right", "right upper zone", "superior right region"},
    {"lower left", "left lower zone", "inferior left region"},
    {"lower right", "right lower zone", "inferior right region"},
};
const char* kPresentTpl[4] = {
    "there is a {E} in the {P}.",
    "a {E} is seen in the {P}.",
    "{E} noted in the {P}.",
    "we observe a {E} overlying the {P}.",
};
const char* kAbsentTpl[4] = {
    "no {E} in the {P}.",
    "no evidence of {E} in the {P}.",
    "the {P} shows no {E}.",
    "{E} is not seen in the {P}.",
};
const char* kFillers[4] = {"", "stable exam.", "comparison made to prior imaging.",
                           "technically adequate study."};

std::string expand(const std::string& tpl, const std::string& e,
                   const std::string& p) {
  std::string out = tpl;
  auto sub = [&out](const std::string& what, const std::string& with) {
    size_t pos = out.find(what);
    if (pos != std::string::npos) out.replace(pos, what.size(), with);
  };
  sub("{E}", e);
  sub("{P}", p);
  return out;
}

struct Ctx {
  uint64_t seed;
  uint64_t stream;
  uint64_t counter = 0;
  double u() { return rng::uniform(seed, stream, counter++); }
  uint64_t below(uint64_t n) { return rng::below(seed, stream, counter++, n); }
};

void render_tube(GrayImage& img, size_t qr, size_t qc, size_t q, Ctx& ctx) {
  // Anti-aliased bright segment through the quadrant center.
  double cr = qr + q * 0.5, cc = qc + q * 0.5;
  double angle = ctx.u() * M_PI;
  double half = q * 0.42;
  double dr = std::sin(angle), dc = std::cos(angle);
  double width = 0.8 + 0.4 * ctx.u();
  double amp = 0.78 + 0.2 * ctx.u();
  double r0 = cr - half * dr, c0 = cc - half * dc;
  double r1 = cr + half * dr, c1 = cc + half * dc;
  for (size_t r = 0; r < img.height; ++r) {
    for (size_t c = 0; c < img.width; ++c) {
      double vr = r - r0, vc = c - c0;
      double wr = r1 - r0, wc = c1 - c0;
      double len2 = wr * wr + wc * wc;
      double t = std::clamp((vr * wr + vc * wc) / len2, 0.0, 1.0);
      double pr = r0 + t * wr, pc = c0 + t * wc;
      double d2 = (r - pr) * (r - pr) + (c - pc) * (c - pc);
      double v = amp * std::exp(-d2 / (2.0 * width * width));
      img.at(r, c) = std::max(img.at(r, c), v);
    }
  }
}

void render_opacity(GrayImage& img, size_t qr, size_t qc, size_t q, Ctx& ctx) {
  double cr = qr + q * (0.35 + 0.3 * ctx.u());
  double cc = qc + q * (0.35 + 0.3 * ctx.u());
  double sigma = q * (0.16 + 0.06 * ctx.u());
  double amp = 0.5 + 0.18 * ctx.u();
  for (size_t r = 0; r < img.height; ++r) {
    for (size_t c = 0; c < img.width; ++c) {
      double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
      double v = amp * std::exp(-d2 / (2.0 * sigma * sigma));
      img.at(r, c) = std::max(img.at(r, c), v);
    }
  }
}

void render_nodule(GrayImage& img, size_t qr, size_t qc, size_t q, Ctx& ctx) {
  double cr = qr + q * (0.35 + 0.3 * ctx.u());
  double cc = qc + q * (0.35 + 0.3 * ctx.u());
  double radius = q * (0.11 + 0.05 * ctx.u());
  double amp = 0.8 + 0.18 * ctx.u();
  for (size_t r = 0; r < img.height; ++r) {
    for (size_t c = 0; c < img.width; ++c) {
      double d = std::sqrt((r - cr) * (r - cr) + (c - cc) * (c - cc));
      double v = amp / (1.0 + std::exp((d - radius) / 0.45));
      img.at(r, c) = std::max(img.at(r, c), v);
    }
  }
}

}  // namespace

SynthStudy synth_study(size_t index, uint64_t seed, size_t image_size) {
  Ctx ctx{seed, rng::stream_for(rng::Stream::synth, index)};
  SynthStudy out;
  char idbuf[16];
  std::snprintf(idbuf, sizeof(idbuf), "s%05zu", index);
  out.study.study_id = idbuf;

  // Noisy dark background.
  out.image = GrayImage(image_size, image_size);
  for (size_t i = 0; i < out.image.size(); ++i)
    out.image.data[i] = 0.05 + 0.07 * ctx.u();

  size_t quad = image_size / 2;
  size_t count = ctx.below(4);  // 0..3 structures
  size_t quads[4] = {0, 1, 2, 3};
  for (size_t i = 4; i > 1; --i) std::swap(quads[i - 1], quads[ctx.below(i)]);

  bool rendered[3][4] = {};
  for (size_t s = 0; s < count; ++s) {
    size_t pos = quads[s];
    size_t ent = ctx.below(3);
    size_t qr = (pos / 2) * quad, qc = (pos % 2) * quad;
    switch (ent) {
      case 0: render_tube(out.image, qr, qc, quad, ctx); break;
      case 1: render_opacity(out.image, qr, qc, quad, ctx); break;
      case 2: render_nodule(out.image, qr, qc, quad, ctx); break;
    }
    rendered[ent][pos] = true;
    out.study.triplets.push_back(
        {kEntities[ent], kPositions[pos], Exist::present});
  }
  for (double& v : out.image.data) v = std::clamp(v, 0.0, 1.0);

  // Distractor absent-findings on slots that were not rendered.
  size_t distractors = ctx.below(3);  // 0..2
  for (size_t d = 0; d < distractors; ++d) {
    for (int tries = 0; tries < 8; ++tries) {
      size_t ent = ctx.below(3);
      size_t pos = ctx.below(4);
      if (rendered[ent][pos]) continue;
      rendered[ent][pos] = true;  // also avoids duplicate distractors
      out.study.triplets.push_back(
          {kEntities[ent], kPositions[pos], Exist::absent});
      break;
    }
  }

  // Free-form report with per-study stylistic drift.
  std::vector<std::string> sentences;
  for (const auto& t : out.study.triplets) {
    size_t ent = 0, pos = 0;
    for (size_t i = 0; i < 3; ++i)
      if (t.entity == kEntities[i]) ent = i;
    for (size_t i = 0; i < 4; ++i)
      if (t.position == kPositions[i]) pos = i;
    const char* e = kEntitySyn[ent][ctx.below(3)];
    const char* p = kPositionSyn[pos][ctx.below(3)];
    const char* tpl = t.exist == Exist::present ? kPresentTpl[ctx.below(4)]
                                                : kAbsentTpl[ctx.below(4)];
    sentences.push_back(expand(tpl, e, p));
  }
  for (size_t i = sentences.size(); i > 1; --i)
    std::swap(sentences[i - 1], sentences[ctx.below(i)]);
  std::string report = kFillers[ctx.below(4)];
  for (const auto& s : sentences) {
    if (!report.empty()) report += ' ';
    report += s;
  }
  if (report.empty()) report = "unremarkable study.";
  out.study.report = report;
  return out;
}

void synth_dataset(size_t count, uint64_t seed, size_t image_size,
                   const std::string& out_dir) {
  if (count == 0) throw Error(ErrorCode::config, "count must be >= 1");
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(fs::path(out_dir) / "images", ec);
  if (ec) throw Error(ErrorCode::io, "cannot create " + out_dir + ": " + ec.message());
  std::ofstream jsonl(fs::path(out_dir) / "studies.jsonl");
  if (!jsonl) throw Error(ErrorCode::io, "cannot write studies.jsonl in " + out_dir);
  for (size_t i = 0; i < count; ++i) {
    SynthStudy s = synth_study(i, seed, image_size);
    jsonl << serialize_study(s.study) << '\n';
    write_pgm(s.image,
              (fs::path(out_dir) / "images" / (s.study.study_id + ".pgm")).string());
  }
  if (!jsonl) throw Error(ErrorCode::io, "short write in " + out_dir);
}

}  // namespace mmpt
