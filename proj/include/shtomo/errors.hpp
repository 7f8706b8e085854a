#pragma once

#include <stdexcept>
#include <string>

namespace shtomo {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual const char* kind() const noexcept { return "Error"; }
};

#define SHTOMO_DEFINE_ERROR(Name)                                 \
  class Name : public Error {                                     \
   public:                                                        \
    using Error::Error;                                           \
    const char* kind() const noexcept override { return #Name; } \
  }

SHTOMO_DEFINE_ERROR(DimensionError);
SHTOMO_DEFINE_ERROR(InvalidStateError);
SHTOMO_DEFINE_ERROR(SamplingError);
SHTOMO_DEFINE_ERROR(ApertureError);
SHTOMO_DEFINE_ERROR(ArgumentError);
SHTOMO_DEFINE_ERROR(DegenerateDataError);
SHTOMO_DEFINE_ERROR(GeometryError);
SHTOMO_DEFINE_ERROR(ConfigError);

#undef SHTOMO_DEFINE_ERROR

}  // namespace shtomo
