// Copyright 2026 The cbq Authors
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

#ifndef CBQ_ERROR_H_
#define CBQ_ERROR_H_

#include <stdexcept>
#include <string>

namespace cbq {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (tensor, Boolean function, certificate files).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Arguments with incompatible sizes or out-of-range parameters.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// The conic solver could not set up or finish a problem.
class SolverError : public Error {
 public:
  using Error::Error;
};

// A numerical object failed a validity check (non-PSD matrix, Gram mismatch,
// violated consistency conditions).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace cbq

#endif  // CBQ_ERROR_H_
