#pragma once

#include <stdexcept>
#include <string>

namespace idselect {

// Error taxonomy used across the library. The CLI maps these onto exit
// codes: ConfigError/ShapeError/InvalidActionError/InvalidPairError/
// ProtocolError -> 2, NumericError -> 3.

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidActionError : std::runtime_error {
    explicit InvalidActionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidPairError : std::runtime_error {
    explicit InvalidPairError(const std::string& msg) : std::runtime_error(msg) {}
};

struct DegenerateDistributionError : std::runtime_error {
    explicit DegenerateDistributionError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ProtocolError : std::runtime_error {
    explicit ProtocolError(const std::string& msg) : std::runtime_error(msg) {}
};

struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace idselect
