// errors.hpp : exception types shared across the library
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace weatkit {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed input file; message carries the line number where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A token was not found in the embedding vocabulary.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Numerically or structurally degenerate input (e.g. rank-0 PCA input).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Carries every violation found in one validation pass.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<std::string>& violations() const { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "validation failed:";
    for (const auto& s : v) {
      out += "\n  - ";
      out += s;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

using Warnings = std::vector<std::string>;

inline void warn(Warnings* sink, std::string msg) {
  if (sink) sink->push_back(std::move(msg));
}

}  // namespace weatkit
