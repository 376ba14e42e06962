#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lingbayes {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  IndexOutOfRange,
  CyclicInput,
  SidOnCyclic,
  SingularSystem,
  EmptyTrace,
  EmptyConditional,
  NonNumericCell,
  RaggedRows,
  MissingValue,
  VersionMismatch,
  TruncatedRecord,
  UnsortedEdges,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a machine-readable code; the CLI
// prints it as "error: <Code>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace lingbayes
