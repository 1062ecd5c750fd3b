// Copyright 2026 The soundsal Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SOUNDSAL_ERROR_H_
#define SOUNDSAL_ERROR_H_

#include <stdexcept>
#include <string>

namespace soundsal {

// Base class of every error raised by the library. Callers that only want to
// report a failure can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Grid or tensor shapes that do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument value was violated (label out of range,
// non-positive rate, empty pool, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A persisted file could not be decoded: bad magic, version, truncation.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Reading or writing a file failed at the OS level.
class IoError : public Error {
 public:
  using Error::Error;
};

// An iterative procedure produced a non-finite value or ran out of budget.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace soundsal

#endif  // SOUNDSAL_ERROR_H_
