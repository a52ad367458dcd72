#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace d2d {

// Root of every error raised by the library. Subclasses map onto distinct
// CLI exit codes, so keep them disjoint.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  NumericError(const std::string& what, std::ptrdiff_t layer = -1)
      : Error(layer >= 0 ? what + " (layer " + std::to_string(layer) + ")" : what),
        layer_(layer) {}

  // Index of the offending layer, or -1 when not layer-specific.
  std::ptrdiff_t layer() const noexcept { return layer_; }

 private:
  std::ptrdiff_t layer_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, long iteration)
      : Error(what + " at iteration " + std::to_string(iteration)), iteration_(iteration) {}

  long iteration() const noexcept { return iteration_; }

 private:
  long iteration_;
};

// Checkpoint file errors.
class IoError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

class SearchSpaceError : public Error {
 public:
  using Error::Error;
};

}  // namespace d2d
