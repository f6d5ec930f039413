#pragma once

#include <stdexcept>
#include <string>

namespace courserec {

enum class ErrorKind {
  Validation,   // bad input: field-level problems, malformed records
  NotFound,
  Conflict,
  Unavailable,  // a required model or resource is not loaded
  Io,
  Format,       // corrupt or truncated file
  Encoding,
  Training,
  Rule,         // wrapper induction failures
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string field = {})
      : std::runtime_error(message), kind_(kind), field_(std::move(field)) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Name of the offending field for validation errors, empty otherwise.
  const std::string& field() const noexcept { return field_; }

 private:
  ErrorKind kind_;
  std::string field_;
};

}  // namespace courserec
