#pragma once

#include <stdexcept>
#include <string>

namespace lp {

enum class ErrorCode {
  kInvalidArgument = 1,
  kParse,
  kIllegalMove,
  kNumerical,
  kIo,
  kDegenerate,
  kConfig,
  kShape,
  kUnbounded,
  kSetup,
};

// All library failures surface as lp::Error; the C API maps the code onto
// its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lp
