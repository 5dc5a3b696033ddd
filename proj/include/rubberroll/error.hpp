#pragma once

#include <stdexcept>
#include <string>

namespace rubberroll {

enum class ErrorCode {
  kInvalidArgument = 1,
  kNumericalFailure = 2,
  kOutsideRegion = 3,
  kNotFixedPoint = 4,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace rubberroll
