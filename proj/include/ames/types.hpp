#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ames {

using Index = std::size_t;
using Vector = std::vector<double>;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file (Matrix Market, partition file).
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A zero row or column makes the equilibration undefined.
class SingularScalingError : public Error {
 public:
  SingularScalingError(const std::string& what, Index index)
      : Error(what + " " + std::to_string(index)), index_(index) {}
  Index index() const noexcept { return index_; }

 private:
  Index index_;
};

class FactorizationError : public Error {
 public:
  using Error::Error;
};

/// AINV pivot collapse at elimination step `step`.
class BreakdownError : public FactorizationError {
 public:
  BreakdownError(const std::string& what, Index step)
      : FactorizationError(what + " at step " + std::to_string(step)), step_(step) {}
  Index step() const noexcept { return step_; }

 private:
  Index step_;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace ames
