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

#ifndef THZFL_COMMON_HPP_
#define THZFL_COMMON_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace thzfl {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s
inline constexpr double kBoltzmann = 1.380649e-23;    // J/K
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorCode {
  kInvalidArgument = 1,
  kConfig,
  kIo,
  kBadMagic,
  kTruncatedFile,
  kCountMismatch,
  kUnknownPreset,
};

const char *ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Config validation collects every violated field before failing.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string> &violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

[[noreturn]] inline void ThrowInvalid(const std::string &what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

}  // namespace thzfl

#endif  // THZFL_COMMON_HPP_
