#pragma once

#include <stdexcept>
#include <string>

namespace embspec {

/// Category of a failure; the CLI maps these to exit codes.
enum class ErrorKind {
  Usage,      // bad flags or parameters
  Data,       // I/O, format, validation, grouping
  Numeric,    // fit-domain or window problems
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

#define EMBSPEC_DEFINE_ERROR(Name, Kind)                                          \
  class Name : public Error {                                                   \
   public:                                                                      \
    explicit Name(const std::string& msg) : Error(ErrorKind::Kind, msg) {}      \
  };

EMBSPEC_DEFINE_ERROR(UsageError, Usage)
EMBSPEC_DEFINE_ERROR(IoError, Data)
EMBSPEC_DEFINE_ERROR(FormatError, Data)
EMBSPEC_DEFINE_ERROR(VersionError, Data)
EMBSPEC_DEFINE_ERROR(CorruptionError, Data)
EMBSPEC_DEFINE_ERROR(ValidationError, Data)
EMBSPEC_DEFINE_ERROR(ParseError, Data)
EMBSPEC_DEFINE_ERROR(GridMismatchError, Data)
EMBSPEC_DEFINE_ERROR(EmptyGroupError, Data)
EMBSPEC_DEFINE_ERROR(FitDomainError, Numeric)
EMBSPEC_DEFINE_ERROR(WindowError, Numeric)

#undef EMBSPEC_DEFINE_ERROR

}  // namespace embspec
