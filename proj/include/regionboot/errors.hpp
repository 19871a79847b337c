#pragma once

#include <stdexcept>
#include <string>

namespace regionboot {

// Base of every error raised by the library. `operation()` names the
// public operation that failed so the CLI can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string operation, const std::string& what)
      : std::runtime_error(operation + ": " + what), operation_(std::move(operation)) {}

  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string operation_;
};

#define REGIONBOOT_DEFINE_ERROR(Name)                                   \
  class Name : public Error {                                           \
   public:                                                              \
    using Error::Error;                                                 \
  };

REGIONBOOT_DEFINE_ERROR(InvalidArgument)
REGIONBOOT_DEFINE_ERROR(NonConvergence)
REGIONBOOT_DEFINE_ERROR(NonSmoothPoint)
REGIONBOOT_DEFINE_ERROR(UnsupportedDim)
REGIONBOOT_DEFINE_ERROR(InvalidScale)
REGIONBOOT_DEFINE_ERROR(CenterOffBoundary)
REGIONBOOT_DEFINE_ERROR(RankDeficient)
REGIONBOOT_DEFINE_ERROR(InsufficientScales)

#undef REGIONBOOT_DEFINE_ERROR

}  // namespace regionboot
