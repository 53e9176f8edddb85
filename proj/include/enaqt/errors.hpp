// Copyright 2026 The enaqt Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace enaqt {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical-invariant violations (exit code 2 in the CLI).
class NumericalError : public Error {
 public:
  using Error::Error;
};

class NotHermitian : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NotPositive : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class TraceOutOfTolerance : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NonFinite : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class StateInvalid : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SurvivalUnderflow : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ProbabilityOutOfRange : public Error {
 public:
  using Error::Error;
};

class IndexOutOfRange : public Error {
 public:
  using Error::Error;
};

class LayoutMismatch : public Error {
 public:
  using Error::Error;
};

class SpecInvalid : public Error {
 public:
  using Error::Error;
};

class TimeOutOfRange : public Error {
 public:
  using Error::Error;
};

/// Bad run configuration or command-line input (exit code 1 in the CLI).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Model data file could not be read or failed schema checks.
class ModelFileError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace enaqt
