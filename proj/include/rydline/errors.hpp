#pragma once

#include <stdexcept>
#include <string>

namespace rydline {

// Base of every error raised by the library. Callers that only need to
// report a failure can catch this; tests match the concrete subclasses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define RYDLINE_DEFINE_ERROR(Name)                   \
    class Name : public Error {                      \
    public:                                          \
        using Error::Error;                          \
    }

RYDLINE_DEFINE_ERROR(DomainError);
RYDLINE_DEFINE_ERROR(GridError);
RYDLINE_DEFINE_ERROR(FormatError);
RYDLINE_DEFINE_ERROR(SymmetryError);
RYDLINE_DEFINE_ERROR(DegenerateSignalError);
RYDLINE_DEFINE_ERROR(CoverageError);
RYDLINE_DEFINE_ERROR(IntegrationError);
RYDLINE_DEFINE_ERROR(GroundStateEnergyError);
RYDLINE_DEFINE_ERROR(NegativeTemperatureError);
RYDLINE_DEFINE_ERROR(CapacityError);
RYDLINE_DEFINE_ERROR(ConfigError);

#undef RYDLINE_DEFINE_ERROR

}  // namespace rydline
