#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cartan {

enum class ErrorKind {
  InvalidDimension,
  NumericalFailure,
  PrincipalLogUndefined,
  NotInAlgebra,
  NotAnIsomorphism,
  InvalidMutation,
  SignatureError,
  DegenerateMetric,
  UnknownModel,
  ParseError,
  UnknownSymbol,
  OutOfChart,
  FieldError,
  Unsupported,
  DomainError,
  NoGeodesicFound,
  InvalidArgument,
};

std::string_view to_string(ErrorKind kind);

/// Exception carrying a machine-checkable kind. `offset` is only meaningful
/// for parser diagnostics (byte offset into the source).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, long offset = -1);

  ErrorKind kind() const noexcept { return kind_; }
  long offset() const noexcept { return offset_; }

 private:
  ErrorKind kind_;
  long offset_;
};

}  // namespace cartan
