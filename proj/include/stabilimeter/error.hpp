// Copyright 2026 The Stabilimeter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stabilimeter {

enum class ErrorKind { input, parameter, capacity, parse, learner };

/// Base of every exception thrown by the library. The kind selects the
/// CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Malformed or inconsistent input data (empty dataset, schema mismatch).
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorKind::input, what) {}
};

/// A numeric parameter outside its declared range.
class ParameterError : public Error {
 public:
  explicit ParameterError(const std::string& what)
      : Error(ErrorKind::parameter, what) {}
};

/// Exhaustive enumeration requested over a space larger than the bound.
class CapacityError : public Error {
 public:
  explicit CapacityError(const std::string& what)
      : Error(ErrorKind::capacity, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ErrorKind::parse,
              source + (line > 0 ? ":" + std::to_string(line) : std::string()) +
                  ": " + what),
        line_(line) {}

  /// 1-based line number, 0 when the error is not tied to a line.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A learner failed while training; carries the iteration or batch index.
class LearnerError : public Error {
 public:
  LearnerError(std::size_t index, const std::string& what)
      : Error(ErrorKind::learner, what), index_(index) {}

  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

}  // namespace stabilimeter
