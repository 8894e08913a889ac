#pragma once

#include <stdexcept>
#include <string>

namespace loopcool {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define LOOPCOOL_ERROR(Name)                   \
    class Name : public Error {                \
    public:                                    \
        explicit Name(const std::string& what) \
            : Error(#Name ": " + what) {}      \
    };

LOOPCOOL_ERROR(SingularMatrix)
LOOPCOOL_ERROR(NoConvergence)
LOOPCOOL_ERROR(DimensionOverflow)
LOOPCOOL_ERROR(BlowUp)
LOOPCOOL_ERROR(InvalidSpec)
LOOPCOOL_ERROR(NoFixedPoint)
LOOPCOOL_ERROR(Unstable)
LOOPCOOL_ERROR(ShapeMismatch)
LOOPCOOL_ERROR(DomainError)

#undef LOOPCOOL_ERROR

}  // namespace loopcool
