#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ctgi {

/// Base class for runtime failures raised by the library. Precondition
/// violations on arguments are reported with std::invalid_argument instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A pattern has zero spatial variance and the chosen DC policy cannot
/// resolve the corresponding frame.
class DegeneratePatternError : public Error {
 public:
  DegeneratePatternError(std::size_t frame, const std::string& what)
      : Error(what), frame_(frame) {}
  std::size_t frame() const noexcept { return frame_; }

 private:
  std::size_t frame_;
};

/// The per-super-pixel measurement system does not have full column rank.
class RankDeficientError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or corrupted file contents.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// The iterative solver produced non-finite values.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace ctgi
