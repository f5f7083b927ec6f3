#pragma once

#include <stdexcept>
#include <string>

namespace fluctrel {

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define FLUCTREL_ERROR(NAME)                                      \
  struct NAME : Error {                                           \
    explicit NAME(const std::string& what) : Error(#NAME ": " + what) {} \
  }

FLUCTREL_ERROR(NonFiniteDerivative);
FLUCTREL_ERROR(CovarianceNotPSD);
FLUCTREL_ERROR(SingularDiffusion);
FLUCTREL_ERROR(SchemePreconditionFailed);
FLUCTREL_ERROR(InvolutionIncompatible);
FLUCTREL_ERROR(MissingNoiseRecord);
FLUCTREL_ERROR(SamplerUnavailable);
FLUCTREL_ERROR(InsufficientOverlap);
FLUCTREL_ERROR(InsufficientCounts);
FLUCTREL_ERROR(InsufficientSamples);
FLUCTREL_ERROR(DimensionTooLarge);
FLUCTREL_ERROR(UnstableDrift);
FLUCTREL_ERROR(SingularGamma);
FLUCTREL_ERROR(QuadratureFailure);
FLUCTREL_ERROR(WrongParity);
FLUCTREL_ERROR(BurnInNotConverged);
FLUCTREL_ERROR(DegenerateCocycle);
FLUCTREL_ERROR(ConfigInvalid);

#undef FLUCTREL_ERROR

}  // namespace fluctrel
