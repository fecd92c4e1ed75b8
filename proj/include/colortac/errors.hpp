#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace colortac {

/// Index or value outside its admissible range (location, depth level, depth).
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Argument violates a mathematical precondition.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent geometry, frame, ROI or parameter configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An ROI contained only black pixels.
class EmptyRoiError : public std::runtime_error {
 public:
  explicit EmptyRoiError(int roi)
      : std::runtime_error("ROI " + std::to_string(roi) + " has no non-black pixels"), roi_(roi) {}
  int roi() const noexcept { return roi_; }

 private:
  int roi_;
};

/// Malformed input file. `line` is 1-based; 0 means the error is not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Well-formed input carrying out-of-range labels.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace colortac
