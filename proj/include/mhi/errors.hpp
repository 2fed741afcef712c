#pragma once

#include <stdexcept>
#include <string>

namespace mhi {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MHI_DEFINE_ERROR(Name)          \
  class Name : public Error {           \
   public:                              \
    using Error::Error;                 \
  }

MHI_DEFINE_ERROR(DegeneratePlane);
MHI_DEFINE_ERROR(SingularIntrinsics);
MHI_DEFINE_ERROR(RayParallelToPlane);
MHI_DEFINE_ERROR(BehindCamera);
MHI_DEFINE_ERROR(NotARotation);
MHI_DEFINE_ERROR(FormatError);
MHI_DEFINE_ERROR(InvariantViolation);
MHI_DEFINE_ERROR(DimensionMismatch);
MHI_DEFINE_ERROR(EmptyMask);

#undef MHI_DEFINE_ERROR

}  // namespace mhi
