// Copyright 2026 The plantwi Authors. All Rights Reserved.
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

#ifndef PLANTWI_ERROR_H_
#define PLANTWI_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace plantwi {

enum class ErrorCode {
  kInvalidInput,
  kNumericalFailure,
  kEmptyMask,
  kDegeneratePrototype,
  kIoError,
  kUnsupportedVersion,
  kCorruptCheckpoint,
};

std::string_view ErrorCodeName(ErrorCode code);

// All library failures are reported through this exception type; callers
// switch on code() rather than on the dynamic type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput:
      return "InvalidInput";
    case ErrorCode::kNumericalFailure:
      return "NumericalFailure";
    case ErrorCode::kEmptyMask:
      return "EmptyMask";
    case ErrorCode::kDegeneratePrototype:
      return "DegeneratePrototype";
    case ErrorCode::kIoError:
      return "IoError";
    case ErrorCode::kUnsupportedVersion:
      return "UnsupportedVersion";
    case ErrorCode::kCorruptCheckpoint:
      return "CorruptCheckpoint";
  }
  return "Unknown";
}

[[noreturn]] inline void Fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace plantwi

#endif  // PLANTWI_ERROR_H_
