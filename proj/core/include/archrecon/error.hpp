#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace archrecon {

// Error kinds surfaced by the library. The CLI maps them onto exit codes.
enum class ErrorKind {
  Io,
  EmptyRepo,
  Config,
  UnknownFile,
  SingleFileOverflow,
  NonConvergence,
  ContextOverflow,
  BackendUnavailable,
  Auth,
  UnknownTaskTag,
  SectionValidationFailure,
  DiagramParseFailure,
  MermaidSyntax,
  InvalidRestoration,
  MalformedTable,
  LengthMismatch,
  DegenerateVariance,
  SchemaViolation,
  Precondition,
  TooManyFailures,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

}  // namespace archrecon
