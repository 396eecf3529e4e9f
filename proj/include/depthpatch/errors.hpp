#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace depthpatch {

/// Base of every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DEPTHPATCH_DEFINE_ERROR(Name)      \
  class Name : public Error {              \
   public:                                 \
    using Error::Error;                    \
  }

DEPTHPATCH_DEFINE_ERROR(DimensionMismatch);
DEPTHPATCH_DEFINE_ERROR(OutOfBounds);
DEPTHPATCH_DEFINE_ERROR(EmptyMask);
DEPTHPATCH_DEFINE_ERROR(DegenerateGeometry);
DEPTHPATCH_DEFINE_ERROR(ShapeError);
DEPTHPATCH_DEFINE_ERROR(NonFiniteOutput);
DEPTHPATCH_DEFINE_ERROR(GradientUnavailable);
DEPTHPATCH_DEFINE_ERROR(CodecError);
DEPTHPATCH_DEFINE_ERROR(EmptyDataset);
DEPTHPATCH_DEFINE_ERROR(UnreadableFile);
DEPTHPATCH_DEFINE_ERROR(AdapterNotFound);
DEPTHPATCH_DEFINE_ERROR(SidecarMismatch);
DEPTHPATCH_DEFINE_ERROR(ConfigError);
DEPTHPATCH_DEFINE_ERROR(InvalidArgument);

#undef DEPTHPATCH_DEFINE_ERROR

/// Raised when the attack objective becomes NaN/inf; carries the iteration.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(std::size_t iteration, const std::string& what)
      : Error(what), iteration_(iteration) {}
  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

}  // namespace depthpatch
