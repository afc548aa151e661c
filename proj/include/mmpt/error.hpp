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

#include <stdexcept>
#include <string>

namespace mmpt {

enum class ErrorCode {
  io,
  format,
  parse,
  validation,
  config,
  dimension,
  domain,
  usage,
  training,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::io: return "E_IO";
    case ErrorCode::format: return "E_FORMAT";
    case ErrorCode::parse: return "E_PARSE";
    case ErrorCode::validation: return "E_VALIDATION";
    case ErrorCode::config: return "E_CONFIG";
    case ErrorCode::dimension: return "E_DIMENSION";
    case ErrorCode::domain: return "E_DOMAIN";
    case ErrorCode::usage: return "E_USAGE";
    case ErrorCode::training: return "E_TRAINING";
  }
  return "E_UNKNOWN";
}

// All library errors surface as Error; the CLI prints "<code>: <message>"
// on a single stderr line and exits nonzero.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }
  std::string line() const {
    return std::string(error_code_name(code_)) + ": " + what();
  }

 private:
  ErrorCode code_;
};

}  // namespace mmpt
