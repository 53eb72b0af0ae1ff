// Copyright 2026 The Fairbandit Authors. All Rights Reserved.
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

#pragma once

#include <stdexcept>
#include <string>

namespace fairbandit {

// Error categories map one-to-one onto CLI exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid profile, config or prior. Exit code 1.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Unreadable or unwritable file. Exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

// Data that makes a statistic undefined (zero variance, empty cell). Exit code 3.
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Caller broke a precondition (dimension mismatch, reward out of range).
class ContractError : public Error {
 public:
  using Error::Error;
};

// A metric was requested that the log cannot support.
class MetricError : public Error {
 public:
  using Error::Error;
};

}  // namespace fairbandit
