#pragma once

#include <stdexcept>
#include <string>

namespace vsp {

// Exception hierarchy shared by every module. The CLI maps these onto exit
// codes: FormatError and InvalidArgument are usage errors (2), the rest are
// runtime errors (1).

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t actual, const std::string& what = {})
      : Error("dimension mismatch" + (what.empty() ? std::string{} : " in " + what) +
              ": expected " + std::to_string(expected) + ", got " + std::to_string(actual)),
        expected_(expected),
        actual_(actual) {}

  std::size_t expected() const noexcept { return expected_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t expected_;
  std::size_t actual_;
};

class InsufficientPoints : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class UnsupportedOperation : public Error {
 public:
  using Error::Error;
};

}  // namespace vsp
