#pragma once

#include <stdexcept>

namespace lamespec {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define LAMESPEC_DEFINE_ERROR(Name) \
  class Name : public Error {       \
   public:                          \
    using Error::Error;             \
  }

LAMESPEC_DEFINE_ERROR(DegenerateLattice);
LAMESPEC_DEFINE_ERROR(InvalidPeriodRatio);
LAMESPEC_DEFINE_ERROR(PoleAtLatticePoint);
LAMESPEC_DEFINE_ERROR(ModulusOutOfRange);
LAMESPEC_DEFINE_ERROR(SingularPotential);
LAMESPEC_DEFINE_ERROR(IntegratorFailure);
LAMESPEC_DEFINE_ERROR(WindowTooSmall);
LAMESPEC_DEFINE_ERROR(NotSelfAdjoint);
LAMESPEC_DEFINE_ERROR(NotSymmetrizable);
LAMESPEC_DEFINE_ERROR(NewtonDivergence);
LAMESPEC_DEFINE_ERROR(ResolutionTooCoarse);
LAMESPEC_DEFINE_ERROR(UnlabeledEndpoint);
LAMESPEC_DEFINE_ERROR(NonMonotoneV);
LAMESPEC_DEFINE_ERROR(InsufficientTailPoints);
LAMESPEC_DEFINE_ERROR(EndpointAtInfinity);
LAMESPEC_DEFINE_ERROR(NoSignChange);

#undef LAMESPEC_DEFINE_ERROR

}  // namespace lamespec
