#pragma once

#include <stdexcept>
#include <string>

namespace mixcenter {

/// Argument outside the domain of an operation (t outside (0,1), c outside the
/// admissible center interval, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A numerical routine did not reach its requested tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double achieved)
      : std::runtime_error(what + " (achieved " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// A problem instance exceeds a configured size guard.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// A mathematical invariant of a construction failed at run time.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed input file or specification.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mixcenter
