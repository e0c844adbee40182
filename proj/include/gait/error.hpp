#pragma once

#include <stdexcept>
#include <string>

namespace gait {

// Base of every error raised by the library. `kind()` is a stable, short
// identifier printed by the CLI as `error[<kind>]: <message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message)
      : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& message)
      : Error("DimensionMismatch", message) {}
};

class SingularMatrix : public Error {
 public:
  explicit SingularMatrix(const std::string& message)
      : Error("SingularMatrix", message) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error("InvalidArgument", message) {}
};

class Divergence : public Error {
 public:
  explicit Divergence(const std::string& message)
      : Error("Divergence", message) {}
};

class FormatError : public Error {
 public:
  explicit FormatError(const std::string& message)
      : Error("FormatError", message) {}
};

}  // namespace gait
