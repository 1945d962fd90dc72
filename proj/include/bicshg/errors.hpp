#pragma once

#include <stdexcept>
#include <string>

namespace bicshg {

// Base of everything the solver throws on a failed precondition or a
// numerical breakdown. Plain argument errors use std::invalid_argument.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Root finding, continuation, iteration or lattice-sum failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

// The requested point lies outside the region where the two-harmonic
// model is self-consistent.
class ValidityError : public Error {
public:
    using Error::Error;
};

#define BICSHG_DEFINE_ERROR(Name, Base)        \
    class Name : public Base {                 \
    public:                                    \
        explicit Name(const std::string& what) \
            : Base(#Name ": " + what) {}       \
    };

BICSHG_DEFINE_ERROR(ThresholdProximity, NumericalError)
BICSHG_DEFINE_ERROR(NoBracket, NumericalError)
BICSHG_DEFINE_ERROR(DegenerateDerivative, NumericalError)
BICSHG_DEFINE_ERROR(CurveLost, NumericalError)
BICSHG_DEFINE_ERROR(NotFound, NumericalError)
BICSHG_DEFINE_ERROR(SecondHarmonicResonance, NumericalError)
BICSHG_DEFINE_ERROR(ZetaSingular, NumericalError)
BICSHG_DEFINE_ERROR(NegativeDiscriminant, NumericalError)
BICSHG_DEFINE_ERROR(NoConvergence, NumericalError)
BICSHG_DEFINE_ERROR(InvalidRegion, ValidityError)
BICSHG_DEFINE_ERROR(OutsideValidity, ValidityError)
BICSHG_DEFINE_ERROR(ConservationViolation, ValidityError)

#undef BICSHG_DEFINE_ERROR

}  // namespace bicshg
