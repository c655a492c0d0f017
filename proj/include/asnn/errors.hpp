#pragma once

#include <stdexcept>
#include <string>

namespace asnn {

// Bad run configuration (unknown keys, missing fields, conflicting
// options). Maps to CLI exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Bad input data (malformed files, inconsistent records). Maps to CLI
// exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace asnn
