#pragma once

#include <stdexcept>
#include <string>

namespace ltlab {

// Invalid parameters or inputs rejected before any computation.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed or unreadable files.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A computation that cannot produce a meaningful number.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace ltlab
