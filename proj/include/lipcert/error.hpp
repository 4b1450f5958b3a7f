#pragma once

#include <stdexcept>
#include <string>

namespace lipcert {

enum class ErrorCode {
  kDimension = 1,
  kDomain = 2,
  kParse = 3,
  kIo = 4,
  kSolver = 5,
  kUnsupported = 6,
  kNumerical = 7,
};

// Single exception type for the library; the C API maps `code()` onto its
// integer status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void throw_dimension(const std::string& what) {
  throw Error(ErrorCode::kDimension, what);
}

[[noreturn]] inline void throw_domain(const std::string& what) {
  throw Error(ErrorCode::kDomain, what);
}

}  // namespace lipcert
