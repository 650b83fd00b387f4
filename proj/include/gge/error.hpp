#pragma once

#include <stdexcept>
#include <string>

namespace gge {

// Every error raised by the library derives from Error so callers (the CLI in
// particular) can report a stable kind() alongside the message.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "error"; }
};

#define GGE_DECLARE_ERROR(Name, Kind)                                  \
  class Name : public Error {                                          \
   public:                                                             \
    using Error::Error;                                                \
    const char* kind() const noexcept override { return Kind; }        \
  }

GGE_DECLARE_ERROR(ShapeError, "shape");
GGE_DECLARE_ERROR(InvalidArchitecture, "invalid-architecture");
GGE_DECLARE_ERROR(CacheError, "cache");
GGE_DECLARE_ERROR(NumericError, "numeric");
GGE_DECLARE_ERROR(ConfigError, "config");
GGE_DECLARE_ERROR(ValidationError, "validation");
GGE_DECLARE_ERROR(DataError, "data");
GGE_DECLARE_ERROR(IoError, "io");

#undef GGE_DECLARE_ERROR

class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  const char* kind() const noexcept override { return "parse"; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gge
