#pragma once

#include <stdexcept>
#include <string>

namespace gridlock {

enum class ErrorCode {
  InvalidArgument,
  Infeasible,
  Schema,
  Divergence,
  Unsettled,
  Leakage,
  Indeterminate,
};

// Library failures carry a code so front ends can map them to exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace gridlock
