#pragma once

#include <stdexcept>
#include <string>

namespace plap {

enum class ErrorCode {
  InvalidArgument = 1,
  OutOfRange = 2,
  NumericalFailure = 3,
  NotFound = 4,
  Io = 5,
};

// All core failures surface as plap::Error; the C API maps code() onto its
// status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace plap
