#pragma once

#include <stdexcept>

namespace tdsim {

// Invalid model, policy, scenario, or settings input. The CLI maps this to
// exit code 3. Messages name the offending key or field.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed command line, range spec, or sweep parameter path. Exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem or stream failure while reading/writing run outputs. Exit code 4.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A flow evaluation threw during integration; the message carries the
// simulation time at which it happened.
class SimulationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace tdsim
