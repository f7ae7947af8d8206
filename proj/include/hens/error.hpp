#pragma once

#include <stdexcept>
#include <string>

namespace hens {

// Base for all library errors. The subclasses map onto CLI exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid user input: malformed config, bad dimensions, out-of-range parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A numerical precondition of an operation does not hold for the given data
// (e.g. a series that is not conjugate-symmetric, or a vanishing dephasing factor).
class PreconditionError : public Error {
public:
    using Error::Error;
};

// Weights with negative entries cannot be sampled from.
class SamplingError : public Error {
public:
    SamplingError() : Error("not a probability distribution — cannot sample") {}
    explicit SamplingError(const std::string& what) : Error(what) {}
};

}  // namespace hens
