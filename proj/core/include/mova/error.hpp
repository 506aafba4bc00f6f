#pragma once

#include <stdexcept>
#include <string>

namespace mova {

// Raised for invalid configuration: bad CLI arguments, malformed maps,
// mismatched objective/transform arity. Mapped to exit code 2 by the CLI.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace mova
