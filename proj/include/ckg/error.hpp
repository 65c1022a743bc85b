#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ckg {

enum class ErrorCode {
  MissingName,
  MalformedFrontMatter,
  NoHeadings,
  DepthJump,
  InvalidRules,
  ChainViolation,
  DuplicateTerm,
  MalformedGazetteer,
  PolicyDisabled,
  CrossCourseInput,
  SameCourseInput,
  InvalidGraph,
  UnknownCourse,
  UnknownPair,
  EmptyCourse,
  CourseMismatch,
  KTooLarge,
  SchemaMismatch,
  InvalidArgument,
  ParseError,
  IoError,
  AdapterError,
  ConfigError,
  StageError,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit path) can tell module errors apart.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace ckg
