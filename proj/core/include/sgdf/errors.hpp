#pragma once

#include <stdexcept>
#include <string>

namespace sgdf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SGDF_DEFINE_ERROR(Name)      \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

SGDF_DEFINE_ERROR(DimensionMismatch);
SGDF_DEFINE_ERROR(NonFiniteResult);
SGDF_DEFINE_ERROR(NonFiniteGradient);
SGDF_DEFINE_ERROR(InvalidStd);
SGDF_DEFINE_ERROR(DegenerateFusion);
SGDF_DEFINE_ERROR(InvalidBeta);
SGDF_DEFINE_ERROR(InvalidSchedule);
SGDF_DEFINE_ERROR(InvalidEigenvalue);
SGDF_DEFINE_ERROR(InvalidConfig);
SGDF_DEFINE_ERROR(InvalidStep);
SGDF_DEFINE_ERROR(NonIntegrable);
SGDF_DEFINE_ERROR(BinningMismatch);
SGDF_DEFINE_ERROR(OutOfOrderStep);
SGDF_DEFINE_ERROR(EmptyLedger);
SGDF_DEFINE_ERROR(InsufficientSpan);
SGDF_DEFINE_ERROR(ConfigError);
SGDF_DEFINE_ERROR(IoError);
SGDF_DEFINE_ERROR(UnknownSuite);

#undef SGDF_DEFINE_ERROR

}  // namespace sgdf
