/**
 * @file errors.hpp
 * @brief Exception types shared across the melotok library.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace melotok {

/// Base class for all melotok errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An encoding or command configuration violates its invariants.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value (pitch, duration, index) falls outside its legal range.
class RangeError : public Error {
 public:
  using Error::Error;
};

/// A token spelling or id is not part of the active vocabulary.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// A token sequence breaks the grammar; carries the offending token index.
class SequenceError : public Error {
 public:
  SequenceError(std::size_t token_index, const std::string& what)
      : Error("token " + std::to_string(token_index) + ": " + what),
        token_index_(token_index) {}

  std::size_t tokenIndex() const { return token_index_; }

 private:
  std::size_t token_index_;
};

/// Input bytes or text could not be parsed; carries a byte or line offset.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& what)
      : Error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

  explicit ParseError(const std::string& what) : Error(what), offset_(0) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// A statistic is undefined for the given sample (too small or degenerate).
class StatsError : public Error {
 public:
  using Error::Error;
};

}  // namespace melotok
