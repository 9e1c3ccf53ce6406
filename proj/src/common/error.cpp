#include "common/error.hpp"

namespace mg {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid argument";
    case ErrorKind::kDimension: return "dimension error";
    case ErrorKind::kContract: return "contract error";
    case ErrorKind::kNumeric: return "numeric error";
    case ErrorKind::kConfig: return "configuration error";
    case ErrorKind::kParse: return "parse error";
    case ErrorKind::kIo: return "i/o error";
    case ErrorKind::kUnknownTag: return "unknown tag";
  }
  return "error";
}

}  // namespace mg
