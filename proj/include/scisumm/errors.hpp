#pragma once

#include <stdexcept>
#include <string>

namespace scisumm {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input record; `field()` names the offending field.
class ParseError : public Error {
 public:
  ParseError(std::string field, const std::string& what)
      : Error("parse error in field '" + field + "': " + what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class EmptyDocumentError : public Error {
 public:
  using Error::Error;
};

/// Provider could not be reached or loaded.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// Provider answered, but the answer breaks the embedding contract.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class MissingVectorError : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace scisumm
