#pragma once

#include <stdexcept>
#include <string>

namespace resest {

/// Base of every error raised by the library. Each failure mode named in the
/// public contracts gets its own subclass so callers can catch selectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define RESEST_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

RESEST_DEFINE_ERROR(NonRealSpectrum);
RESEST_DEFINE_ERROR(RepeatedEigenvalue);
RESEST_DEFINE_ERROR(IllConditioned);
RESEST_DEFINE_ERROR(ModeNotDetectable);
RESEST_DEFINE_ERROR(DimensionMismatch);
RESEST_DEFINE_ERROR(InvalidGraph);
RESEST_DEFINE_ERROR(EmptySet);
RESEST_DEFINE_ERROR(TooLarge);
RESEST_DEFINE_ERROR(TooFewValues);
RESEST_DEFINE_ERROR(UnknownLink);
RESEST_DEFINE_ERROR(DomainError);
RESEST_DEFINE_ERROR(ConfigInvalid);
RESEST_DEFINE_ERROR(ParseError);

#undef RESEST_DEFINE_ERROR

}  // namespace resest
