#pragma once

#include <stdexcept>
#include <string>

namespace flowgest {

// Every recoverable failure in the library surfaces as this exception.
// The CLI maps it to exit code 2; flag/usage problems exit 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

[[noreturn]] inline void fail(const std::string& msg) { throw Error(msg); }

}  // namespace flowgest
