#pragma once

#include <stdexcept>
#include <string>

namespace fogplace {

/// Bad input data: malformed config file, unknown device class, missing
/// capacity, inconsistent parameters. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// No placement satisfies the capacity/cardinality constraints, or a
/// timing plan leaves no transmission budget. CLI maps this to exit code 3.
class InfeasibleError : public std::runtime_error {
public:
    explicit InfeasibleError(const std::string& what) : std::runtime_error(what) {}
};

/// Route requested between nodes that are not connected.
class RoutingError : public std::runtime_error {
public:
    explicit RoutingError(const std::string& what) : std::runtime_error(what) {}
};

/// Internal invariant broke (a bug, not bad input). CLI maps this to exit
/// code 4.
class InternalError : public std::logic_error {
public:
    explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

} // namespace fogplace
