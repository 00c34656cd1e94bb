#pragma once

#include <stdexcept>
#include <string>

namespace sio {

// Invalid argument supplied by the caller (unknown id, negative radius, ...).
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Input is well-formed but too degenerate to operate on (zero measure, single point).
class DegenerateInputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A documented precondition does not hold (e.g. diameter > 1 before pushforward).
class PreconditionError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Kernel evaluated on the diagonal x == y.
class DiagonalError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Configured size or depth budget exceeded.
class ResourceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class SearchExhaustedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A certification step of the convergence pipeline failed.
class CertificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace sio
