#pragma once

#include <stdexcept>
#include <string>

namespace nli {

// Invalid user input: bad config values, malformed files, unsupported options.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical procedure failed to meet its accuracy contract.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Internal contract violation between modules (e.g. mismatched class sets).
class ContractError : public std::logic_error {
public:
    explicit ContractError(const std::string& msg) : std::logic_error(msg) {}
};

} // namespace nli
