#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rctadjust {

enum class ErrorCode {
  Io,
  Parse,
  InvalidArgument,
  SingularDesign,
  Estimation,
  Internal,
};

class Error : public std::runtime_error {
public:
  Error(ErrorCode code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

private:
  ErrorCode code_;
};

/// Raised by the least-squares solver when a design column is linearly
/// dependent on earlier columns beyond the rank tolerance.
class SingularDesignError : public Error {
public:
  SingularDesignError(std::size_t column, std::string message)
      : Error(ErrorCode::SingularDesign, std::move(message)), column_(column) {}

  std::size_t column() const noexcept { return column_; }

private:
  std::size_t column_;
};

[[noreturn]] inline void throw_invalid(const std::string& msg) {
  throw Error(ErrorCode::InvalidArgument, msg);
}

}  // namespace rctadjust
