/**
 * Copyright 2026 The thzfl Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "thzfl/common.hpp"

#include <sstream>

namespace thzfl {

const char *ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "invalid-argument";
    case ErrorCode::kConfig: return "config-validation";
    case ErrorCode::kIo: return "io-error";
    case ErrorCode::kBadMagic: return "bad-magic";
    case ErrorCode::kTruncatedFile: return "truncated-file";
    case ErrorCode::kCountMismatch: return "count-mismatch";
    case ErrorCode::kUnknownPreset: return "unknown-preset";
  }
  return "unknown";
}

namespace {
std::string JoinViolations(const std::vector<std::string> &violations) {
  std::ostringstream os;
  os << "invalid config (" << violations.size() << " violation"
     << (violations.size() == 1 ? "" : "s") << ")";
  for (const auto &v : violations) os << "\n  - " << v;
  return os.str();
}
}  // namespace

ConfigError::ConfigError(std::vector<std::string> violations)
    : Error(ErrorCode::kConfig, JoinViolations(violations)), violations_(std::move(violations)) {}

}  // namespace thzfl
