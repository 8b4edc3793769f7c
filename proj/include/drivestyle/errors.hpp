#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace drivestyle {

// Base for every error raised by the library. `module()` names the stage that
// failed so the CLI can tag diagnostics.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

// Malformed input (bad row, bad config value). Maps to exit code 1.
class ParseError : public Error {
 public:
  ParseError(std::string module, std::size_t line, const std::string& what)
      : Error(std::move(module), "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a domain rule. Maps to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// A caller broke a precondition. Maps to exit code 2.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class ConditioningError : public Error {
 public:
  using Error::Error;
};

}  // namespace drivestyle
