#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace taskbench {

enum class ErrorCode {
  NotFound,
  ParseError,
  DuplicateDefinition,
  IncompatibleSelection,
  SceneCountMismatch,
  CapabilityMissing,
  InvalidEnvironment,
  InvalidArgument,
  ModeViolation,
  SessionFinished,
  VariantMismatch,
  WrongChannel,
  Busy,
  NoMoreScenes,
  NotSupported,
  BadRequest,
  AddrInUse,
  ConnectionError,
  SupervisorUnhealthy,
  ObservationError,
  AgentError,
  ResultValidationError,
  SubmissionFailed,
  SchemaMismatch,
  EmptyInput,
  Internal,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the harness carries one of the codes above; the
// code string is what travels in wire error envelopes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class ParseError : public Error {
 public:
  ParseError(std::string path, int line, const std::string& message)
      : Error(ErrorCode::ParseError,
              path + ":" + std::to_string(line) + ": " + message),
        path_(std::move(path)),
        line_(line) {}

  const std::string& path() const noexcept { return path_; }
  /// 1-based; 0 when the location is unknown.
  int line() const noexcept { return line_; }

 private:
  std::string path_;
  int line_;
};

class SubmissionFailed : public Error {
 public:
  explicit SubmissionFailed(int exit_code)
      : Error(ErrorCode::SubmissionFailed,
              "submission exited with status " + std::to_string(exit_code)),
        exit_code_(exit_code) {}

  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

}  // namespace taskbench
