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

#include "mmpt/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "mmpt/error.hpp"

namespace mmpt {

namespace {

constexpr char kMagic[8] = {'M', 'M', 'P', 'T', 'C', 'K', 'P', '1'};

void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
uint32_t read_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return v;
}
uint64_t read_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

void write_tensor(std::ofstream& out, const Tensor& t) {
  out.write(reinterpret_cast<const char*>(t.data.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
}

void read_tensor(std::ifstream& in, Tensor& t) {
  in.read(reinterpret_cast<char*>(t.data.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
}

}  // namespace

void save_checkpoint(const std::string& path, const ModelParams& params,
                     const AdamW& opt, uint64_t config_hash, uint64_t step) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out.write(kMagic, 8);
  write_u64(out, config_hash);
  write_u64(out, step);
  write_u64(out, opt.t);
  uint32_t count = 0;
  params.for_each([&count](const Param&) { ++count; });
  write_u32(out, count);
  params.for_each([&out](const Param& p) {
    write_u32(out, static_cast<uint32_t>(p.name.size()));
    out.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    write_u32(out, static_cast<uint32_t>(p.value.rows));
    write_u32(out, static_cast<uint32_t>(p.value.cols));
    write_tensor(out, p.value);
    write_tensor(out, p.m);
    write_tensor(out, p.v);
  });
  if (!out) throw Error(ErrorCode::io, "short write: " + path);
}

uint64_t load_checkpoint(const std::string& path, ModelParams& params,
                         AdamW& opt, uint64_t expected_config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  char magic[8] = {0};
  in.read(magic, 8);
  if (std::memcmp(magic, kMagic, 8) != 0)
    throw Error(ErrorCode::format, "not a checkpoint file: " + path);
  uint64_t hash = read_u64(in);
  if (hash != expected_config_hash)
    throw Error(ErrorCode::validation,
                "checkpoint config hash mismatch (checkpoint " +
                    std::to_string(hash) + ", config " +
                    std::to_string(expected_config_hash) + ")");
  uint64_t step = read_u64(in);
  opt.t = read_u64(in);
  uint32_t count = read_u32(in);
  uint32_t expected = 0;
  params.for_each([&expected](const Param&) { ++expected; });
  if (count != expected)
    throw Error(ErrorCode::validation, "checkpoint parameter count mismatch");
  params.for_each([&in, &path](Param& p) {
    uint32_t name_len = read_u32(in);
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    if (name != p.name)
      throw Error(ErrorCode::validation,
                  "checkpoint parameter order mismatch: expected " + p.name +
                      ", found " + name + " in " + path);
    uint32_t rows = read_u32(in);
    uint32_t cols = read_u32(in);
    if (rows != p.value.rows || cols != p.value.cols)
      throw Error(ErrorCode::validation, "checkpoint shape mismatch for " + p.name);
    read_tensor(in, p.value);
    read_tensor(in, p.m);
    read_tensor(in, p.v);
  });
  if (!in) throw Error(ErrorCode::format, "truncated checkpoint: " + path);
  return step;
}

}  // namespace mmpt
