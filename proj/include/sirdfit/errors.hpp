#pragma once

#include <stdexcept>
#include <string>

namespace sirdfit {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptySeriesError : Error {
    EmptySeriesError() : Error("series has no records") {}
};

struct MissingEndpointError : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct SchemeError : Error {
    using Error::Error;
};

struct DegenerateRangeError : Error {
    DegenerateRangeError() : Error("min-max normalization range is zero") {}
};

struct DegenerateRatesError : Error {
    DegenerateRatesError() : Error("gamma + mu must be positive") {}
};

struct ConstantObservedError : Error {
    ConstantObservedError() : Error("observed series is constant; R^2 undefined") {}
};

struct AllInfeasibleError : Error {
    AllInfeasibleError() : Error("no particle produced a finite cost") {}
};

struct InsufficientPopulationError : Error {
    using Error::Error;
};

struct NonFiniteError : Error {
    NonFiniteError() : Error("trajectory left the finite range") {}
};

} // namespace sirdfit
