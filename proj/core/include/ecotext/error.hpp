#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ecotext {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. `line()` is 1-based; 0 when no line applies.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that breaks a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Requested energy backend cannot be used on this host.
class EnergyBackendError : public Error {
 public:
  using Error::Error;
};

}  // namespace ecotext
