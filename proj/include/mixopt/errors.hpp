#pragma once

#include <stdexcept>
#include <string>

namespace mixopt {

// Error taxonomy mirrors the CLI exit codes: config 2, data 3, numerical 4.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mixopt
