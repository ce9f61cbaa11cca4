// Copyright 2026 The Sievebank Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SIEVEBANK_COMMON_HPP_
#define SIEVEBANK_COMMON_HPP_

#include <cstdint>
#include <stdexcept>
#include <string>

namespace sievebank {

enum class Domain : uint8_t { Source = 0, Target = 1 };

inline const char* domain_name(Domain d) {
  return d == Domain::Source ? "source" : "target";
}

// Identifies one training sample; (domain, index) is unique, index is dense
// within its domain in manifest order.
struct SampleId {
  Domain domain = Domain::Source;
  uint32_t index = 0;

  friend bool operator==(const SampleId&, const SampleId&) = default;
  friend auto operator<=>(const SampleId&, const SampleId&) = default;
};

// Error categories surfaced through the C API as status codes.
enum class Status : int {
  Ok = 0,
  IoError = 1,
  ParseError = 2,
  InvalidArgument = 3,
  ValidationError = 4,
  NumericError = 5,
  InternalError = 6,
};

class Error : public std::runtime_error {
 public:
  Error(Status status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  Status status() const { return status_; }

 private:
  Status status_;
};

struct IoError : Error {
  explicit IoError(const std::string& m) : Error(Status::IoError, m) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& m) : Error(Status::ParseError, m) {}
};
struct InvalidArgumentError : Error {
  explicit InvalidArgumentError(const std::string& m)
      : Error(Status::InvalidArgument, m) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& m)
      : Error(Status::ValidationError, m) {}
};
struct NumericError : Error {
  explicit NumericError(const std::string& m) : Error(Status::NumericError, m) {}
};

}  // namespace sievebank

#endif  // SIEVEBANK_COMMON_HPP_
