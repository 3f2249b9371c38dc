#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mqfb {

enum class ErrorCode {
  invalid_argument,
  dimension_mismatch,
  empty_block,
  not_positive_definite,
  not_converged,
  dense_cap_exceeded,
  wrong_inner_product,
  zero_degree,
  not_polynomial,
  mode_mismatch,
  missing_level,
  io,
  parse,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), detail_(what) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code name.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace mqfb
