#pragma once

#include <stdexcept>
#include <string>

namespace swarmnet {

// Invalid or inconsistent experiment configuration. CLI maps this to exit 1.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// The original (singular) pairwise potential evaluated at or beyond r_flock.
class SingularPotentialError : public std::domain_error {
public:
    explicit SingularPotentialError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace swarmnet
