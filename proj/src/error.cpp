#include "cartan/error.hpp"

namespace cartan {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidDimension: return "InvalidDimension";
    case ErrorKind::NumericalFailure: return "NumericalFailure";
    case ErrorKind::PrincipalLogUndefined: return "PrincipalLogUndefined";
    case ErrorKind::NotInAlgebra: return "NotInAlgebra";
    case ErrorKind::NotAnIsomorphism: return "NotAnIsomorphism";
    case ErrorKind::InvalidMutation: return "InvalidMutation";
    case ErrorKind::SignatureError: return "SignatureError";
    case ErrorKind::DegenerateMetric: return "DegenerateMetric";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::OutOfChart: return "OutOfChart";
    case ErrorKind::FieldError: return "FieldError";
    case ErrorKind::Unsupported: return "Unsupported";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::NoGeodesicFound: return "NoGeodesicFound";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message, long offset)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      offset_(offset) {}

}  // namespace cartan
