// Copyright 2026 The nerprune Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef NERPRUNE_ERRORS_H_
#define NERPRUNE_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nerprune {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The input data (corpus, metadata, results, config) is malformed or
// inconsistent. The CLI maps these to exit code 2.
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// A row parsed fine but its tag string is not part of the tagset.
class TagError : public ParseError {
 public:
  using ParseError::ParseError;
};

class AlignmentError : public DataError {
 public:
  using DataError::DataError;
};

class ConfigError : public DataError {
 public:
  using DataError::DataError;
};

class ScheduleError : public Error {
 public:
  using Error::Error;
};

// Raised when a mask update would un-prune weights.
class MonotonicityError : public Error {
 public:
  using Error::Error;
};

}  // namespace nerprune

#endif  // NERPRUNE_ERRORS_H_
