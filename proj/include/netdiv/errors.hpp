#pragma once

#include <stdexcept>
#include <string>

namespace netdiv {

/// Invalid scenario or strategy/parameter combination; raised before any run.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace netdiv
