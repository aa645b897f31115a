#pragma once

#include <stdexcept>
#include <string>

namespace gapopen {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

/// Input violates a structural hypothesis. The CLI maps these to exit code 2.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A computation could not deliver its contract. The CLI maps these to exit code 3.
class NumericalError : public Error {
public:
    using Error::Error;
};

#define GAPOPEN_DEFINE_ERROR(Name, Base)                                   \
    class Name : public Base {                                             \
    public:                                                                \
        explicit Name(const std::string& what) : Base(#Name, what) {}      \
    };

GAPOPEN_DEFINE_ERROR(WallViolation, ValidationError)
GAPOPEN_DEFINE_ERROR(CoefficientViolation, ValidationError)
GAPOPEN_DEFINE_ERROR(AlphaOutOfRange, ValidationError)
GAPOPEN_DEFINE_ERROR(EpsilonScheduleError, ValidationError)
GAPOPEN_DEFINE_ERROR(OverlapError, ValidationError)
GAPOPEN_DEFINE_ERROR(LatticeError, ValidationError)
GAPOPEN_DEFINE_ERROR(ConfigParseError, ValidationError)
GAPOPEN_DEFINE_ERROR(NoAdmissibleRoot, ValidationError)
GAPOPEN_DEFINE_ERROR(ConditionsViolated, ValidationError)
GAPOPEN_DEFINE_ERROR(SlopeConditionViolated, ValidationError)
GAPOPEN_DEFINE_ERROR(NoGapPredicted, ValidationError)
GAPOPEN_DEFINE_ERROR(MissingFile, ValidationError)

GAPOPEN_DEFINE_ERROR(ConvergenceFailure, NumericalError)
GAPOPEN_DEFINE_ERROR(HermiticityError, NumericalError)
GAPOPEN_DEFINE_ERROR(ResolutionError, NumericalError)
GAPOPEN_DEFINE_ERROR(BracketError, NumericalError)
GAPOPEN_DEFINE_ERROR(DegenerateFit, NumericalError)
GAPOPEN_DEFINE_ERROR(ClosedFormMismatch, NumericalError)
GAPOPEN_DEFINE_ERROR(BandIdentificationError, NumericalError)
GAPOPEN_DEFINE_ERROR(InsufficientData, NumericalError)

#undef GAPOPEN_DEFINE_ERROR

} // namespace gapopen
