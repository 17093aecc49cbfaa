#pragma once

#include <stdexcept>
#include <string>

namespace cimsim {

// Bad user input (malformed files, mismatched shapes on the command line).
// The CLI maps this to exit code 2; everything else is an internal error (1).
struct UsageError : std::runtime_error {
    explicit UsageError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cimsim
