#include "ckg/error.hpp"

namespace ckg {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingName: return "MissingName";
    case ErrorCode::MalformedFrontMatter: return "MalformedFrontMatter";
    case ErrorCode::NoHeadings: return "NoHeadings";
    case ErrorCode::DepthJump: return "DepthJump";
    case ErrorCode::InvalidRules: return "InvalidRules";
    case ErrorCode::ChainViolation: return "ChainViolation";
    case ErrorCode::DuplicateTerm: return "DuplicateTerm";
    case ErrorCode::MalformedGazetteer: return "MalformedGazetteer";
    case ErrorCode::PolicyDisabled: return "PolicyDisabled";
    case ErrorCode::CrossCourseInput: return "CrossCourseInput";
    case ErrorCode::SameCourseInput: return "SameCourseInput";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::UnknownCourse: return "UnknownCourse";
    case ErrorCode::UnknownPair: return "UnknownPair";
    case ErrorCode::EmptyCourse: return "EmptyCourse";
    case ErrorCode::CourseMismatch: return "CourseMismatch";
    case ErrorCode::KTooLarge: return "KTooLarge";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::AdapterError: return "AdapterError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::StageError: return "StageError";
  }
  return "Unknown";
}

}  // namespace ckg
