#pragma once

#include <stdexcept>
#include <string>

namespace sforms {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidPlace : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

// zero rational where a unit is required, or a singular form
struct DegenerateError : Error {
    using Error::Error;
};

struct SingularMatrix : Error {
    using Error::Error;
};

struct PreconditionError : Error {
    using Error::Error;
};

struct BudgetExceeded : Error {
    using Error::Error;
};

struct InternalError : Error {
    using Error::Error;
};

}  // namespace sforms
