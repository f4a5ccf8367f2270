#pragma once

#include <stdexcept>
#include <string>

namespace layerscope {

enum class ErrorCode {
  Dimension,
  Validation,
  BadMagic,
  Truncated,
  MalformedHeader,
  ShapeMismatch,
  NonFinite,
  Numerical,
  Io,
};

const char* to_string(ErrorCode code);

// Every library failure is reported through this type. The CLI maps
// Dimension/Validation/format codes to exit status 2, the rest to 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace layerscope
