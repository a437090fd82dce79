#pragma once

#include <stdexcept>
#include <string>

namespace csched {

// Every error raised by the library derives from Error, so callers that do not
// care about the category can catch a single type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define CSCHED_DEFINE_ERROR(Name)          \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

CSCHED_DEFINE_ERROR(InvalidDemandError);
CSCHED_DEFINE_ERROR(InvalidPlacementError);
CSCHED_DEFINE_ERROR(AllocationConflictError);
CSCHED_DEFINE_ERROR(NotFoundError);
CSCHED_DEFINE_ERROR(PreconditionError);
CSCHED_DEFINE_ERROR(StateError);
CSCHED_DEFINE_ERROR(ValidationError);
CSCHED_DEFINE_ERROR(ConfigError);
CSCHED_DEFINE_ERROR(LoadError);
CSCHED_DEFINE_ERROR(NumericError);
CSCHED_DEFINE_ERROR(FileError);
CSCHED_DEFINE_ERROR(UsageError);

#undef CSCHED_DEFINE_ERROR

// Malformed text input; carries the 1-based line number of the offending row.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace csched
