#include "archrecon/error.hpp"

namespace archrecon {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::EmptyRepo: return "EmptyRepo";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::UnknownFile: return "UnknownFile";
    case ErrorKind::SingleFileOverflow: return "SingleFileOverflow";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ContextOverflow: return "ContextOverflow";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::Auth: return "AuthError";
    case ErrorKind::UnknownTaskTag: return "UnknownTaskTag";
    case ErrorKind::SectionValidationFailure: return "SectionValidationFailure";
    case ErrorKind::DiagramParseFailure: return "DiagramParseFailure";
    case ErrorKind::MermaidSyntax: return "MermaidSyntaxError";
    case ErrorKind::InvalidRestoration: return "InvalidRestoration";
    case ErrorKind::MalformedTable: return "MalformedTable";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
    case ErrorKind::Precondition: return "PreconditionViolation";
    case ErrorKind::TooManyFailures: return "TooManyFailures";
  }
  return "Error";
}

}  // namespace archrecon
