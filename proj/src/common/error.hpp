#pragma once

#include <stdexcept>
#include <string>

namespace mg {

enum class ErrorKind {
  kInvalidArgument,
  kDimension,
  kContract,
  kNumeric,
  kConfig,
  kParse,
  kIo,
  kUnknownTag,
};

const char* to_string(ErrorKind kind);

// Single exception type for the core; the C API maps `kind` onto status codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace mg
