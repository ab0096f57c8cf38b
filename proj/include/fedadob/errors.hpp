//
// Copyright 2026 The fedadob Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef FEDADOB_ERRORS_HPP
#define FEDADOB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fedadob {

// Base class for every error the library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Shape or extent mismatch between tensors/layers.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A scalar argument outside its documented domain (labels, fractions, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered where a finite value is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (IDX, config, ...).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Inconsistent or incomplete run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A federation participant violated the message protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Random generation could not satisfy its postcondition.
class GenerationError : public Error {
 public:
  using Error::Error;
};

// An API contract was broken by the caller (stale cache, wrong pairing).
class ContractError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedadob

#endif  // FEDADOB_ERRORS_HPP
