#pragma once

#include <stdexcept>
#include <string>

namespace dfgeo {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Expression text could not be parsed; `position` is a byte offset into the input.
struct ParseError : Error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : Error(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
};

// Exact evaluation hit a vanishing denominator.
struct PoleError : Error {
    using Error::Error;
};

// A product pushed the total degree past the configured bound.
struct DegreeOverflowError : Error {
    using Error::Error;
};

// Mixed coordinate systems, wrong slot counts, wrong matrix shapes.
struct DimensionError : Error {
    using Error::Error;
};

// Degenerate metric, singular matrix, rank defect and friends.
struct SingularError : Error {
    using Error::Error;
};

// Input violates a documented precondition (asymmetric g, impure covector, ...).
struct ValidationError : Error {
    using Error::Error;
};

// Scenario file is malformed; message names the offending key.
struct ScenarioError : Error {
    using Error::Error;
};

} // namespace dfgeo
