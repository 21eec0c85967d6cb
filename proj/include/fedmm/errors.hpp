#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fedmm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  DimensionError(const std::string& what, std::size_t expected, std::size_t actual)
      : Error(what + ": expected dimension " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const { return expected_; }
  std::size_t actual() const { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

/// Invalid user-supplied parameters (stepsizes, specs, config values).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Raised when an iterate leaves the finite range the run is allowed to explore.
class DivergenceError : public Error {
 public:
  DivergenceError(long round, double norm)
      : Error("iterate diverged at round " + std::to_string(round) + " (|z| = " +
              std::to_string(norm) + ")"),
        round_(round) {}

  long round() const { return round_; }

 private:
  long round_;
};

class SingularSystemError : public Error {
 public:
  using Error::Error;
};

class UnsupportedProblemError : public Error {
 public:
  using Error::Error;
};

}  // namespace fedmm
