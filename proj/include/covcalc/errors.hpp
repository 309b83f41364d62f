#pragma once

#include <stdexcept>
#include <string>

namespace covcalc {

// Raised for bad user input (CLI flags, config files, kernel strings).
// The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Raised when a numerical procedure cannot produce a trustworthy result
// (e.g. a Gram matrix too indefinite to repair). CLI exit code 3.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace covcalc
