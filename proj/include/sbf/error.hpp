// Copyright 2026 The SBF Toolkit Authors.
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

#ifndef SBF_ERROR_HPP
#define SBF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace sbf {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// An illegal scale label, a malformed record, or an inconsistent frame.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Linearized sequence that cannot be turned back into a frame.
class ParseError : public Error {
 public:
  using Error::Error;
};

// I/O or format problems reading corpora, vocabularies, models, logs.
class IoError : public Error {
 public:
  using Error::Error;
};

// Caller violated an operation's precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace sbf

#endif  // SBF_ERROR_HPP
