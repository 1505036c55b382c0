#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bgmatte {

enum class ErrorKind {
  degenerate_input,
  dimension_mismatch,
  out_of_range,
  contract,
  config,
  parse,
  io,
  sequence_gap,
  format,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries a kind so front ends can
/// report it in a machine-parsable form.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace bgmatte
