/*
 * Copyright 2026 The ncota-sim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef NCOTA_ERROR_HPP_
#define NCOTA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace ncota {

enum class ErrorCode {
  kInvalidArgument = 1,
  kInvalidConfig,
  kHalfDuplexViolation,
  kNonFinite,
  kNotConverged,
  kIo,
  kParse,
};

const char* ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception. The C API maps
// `code()` onto its integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void Fail(ErrorCode code, const std::string& message);

inline void Require(bool condition, ErrorCode code, const char* message) {
  if (!condition) Fail(code, message);
}

inline void Require(bool condition, ErrorCode code,
                    const std::string& message) {
  if (!condition) Fail(code, message);
}

}  // namespace ncota

#endif  // NCOTA_ERROR_HPP_
